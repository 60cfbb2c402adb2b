#pragma once

#include <memory>
#include <string_view>

#include "taxorank/graph_embeddings.hpp"
#include "taxorank/meta.hpp"
#include "taxorank/vectors.hpp"

namespace taxorank {

/// A similarity space the ranker can search: words and synsets both map to
/// vectors, and synsets are indexed for nearest-neighbour retrieval. A mask
/// hides synsets (a pseudo-query's own senses) from every lookup.
class Space {
 public:
  virtual ~Space() = default;

  virtual std::string_view kind() const = 0;
  const SynsetIndex& synsets() const { return index_; }
  Geometry geometry() const { return index_.geometry(); }

  /// Throws ZeroQueryError when the word cannot be placed.
  virtual Vector query_vector(std::string_view word, const SynsetIdSet& mask = {}) const = 0;
  virtual Lookup lemma_vector(std::string_view lemma, const SynsetIdSet& mask = {}) const = 0;

  double similarity(const Vector& a, const Vector& b) const { return space_similarity(geometry(), a, b); }

  /// Indexes a synset that was added after construction.
  virtual void add_synset(const Synset& synset);

 protected:
  SynsetIndex index_;
};

class WordSpace : public Space {
 public:
  WordSpace(std::shared_ptr<const VectorStore> store, const Taxonomy& t);

  std::string_view kind() const override { return "words"; }
  Vector query_vector(std::string_view word, const SynsetIdSet& mask = {}) const override;
  Lookup lemma_vector(std::string_view lemma, const SynsetIdSet& mask = {}) const override;
  void add_synset(const Synset& synset) override;

  const VectorStore& store() const { return *store_; }

 private:
  std::shared_ptr<const VectorStore> store_;
};

/// Node embeddings; queries are always projected from their text vectors.
class GraphSpace : public Space {
 public:
  explicit GraphSpace(GraphContext ctx);

  std::string_view kind() const override { return "graph"; }
  Vector query_vector(std::string_view word, const SynsetIdSet& mask = {}) const override;
  Lookup lemma_vector(std::string_view lemma, const SynsetIdSet& mask = {}) const override;

  const GraphContext& context() const { return ctx_; }

 private:
  GraphContext ctx_;
};

/// Synset rows are the mean of the encoded lemmas.
class MetaEmbeddingSpace : public Space {
 public:
  MetaEmbeddingSpace(std::shared_ptr<const MetaSpace> meta, const Taxonomy& t);

  std::string_view kind() const override { return "meta"; }
  Vector query_vector(std::string_view word, const SynsetIdSet& mask = {}) const override;
  Lookup lemma_vector(std::string_view lemma, const SynsetIdSet& mask = {}) const override;
  void add_synset(const Synset& synset) override;

 private:
  Vector synset_row(const Synset& synset) const;
  std::shared_ptr<const MetaSpace> meta_;
};

}  // namespace taxorank
