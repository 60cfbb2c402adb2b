#pragma once

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "taxorank/geometry.hpp"
#include "taxorank/taxonomy.hpp"

namespace taxorank {

/// A resolved vector. `miss` is set when nothing in the vocabulary could
/// stand in for the token and the vector is all zeros.
struct Lookup {
  Vector vec;
  bool miss = false;
};

class VectorStore {
 public:
  explicit VectorStore(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  bool normalized() const { return normalized_; }
  bool contains(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Adds a token; returns false and keeps the existing row on duplicates.
  bool add(std::string token, Vector vec);
  const Vector* find(std::string_view token) const;

  /// Scales every nonzero row to unit length.
  void normalize_rows();

  /// Exact match, else the longest vocabulary token that is a prefix of the
  /// query, else a zero vector flagged as a miss.
  Lookup word_vector(std::string_view token) const;
  /// Mean of the L2-normalised token vectors of a whitespace-separated phrase.
  Lookup phrase_vector(std::string_view phrase) const;
  /// Mean of the phrase vectors of the synset's lemmas.
  Lookup synset_vector(const Synset& synset) const;

 private:
  std::size_t dim_;
  bool normalized_ = false;
  std::vector<std::string> tokens_;
  std::vector<Vector> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// word2vec text format: "count dim" header, then "token v1 ... vdim".
VectorStore read_vectors(std::istream& in);
VectorStore load_vectors(const std::filesystem::path& path);
void write_vectors(std::ostream& out, const std::vector<std::string>& tokens, const Matrix& rows);

struct ScoredId {
  std::string id;
  double score;

  bool operator==(const ScoredId&) const = default;
};

/// Row-per-synset matrix aligned to sorted ids, searchable by similarity in
/// the given geometry.
class SynsetIndex {
 public:
  SynsetIndex() = default;
  SynsetIndex(std::vector<std::string> ids, Matrix rows, Geometry geometry = Geometry::euclidean);

  /// Averages the text vectors of every synset's lemmas.
  static SynsetIndex build(const VectorStore& store, const Taxonomy& taxonomy);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(rows_.cols()); }
  Geometry geometry() const { return geometry_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& rows() const { return rows_; }
  /// Position of the id in ids(), or -1.
  std::ptrdiff_t position(std::string_view id) const;
  Vector row(std::string_view id) const;

  /// Inserts or replaces one row, keeping ids sorted.
  void upsert(const std::string& id, const Vector& vec);

  /// The k most similar synsets, ties broken by id. Synsets in `exclude` are
  /// skipped. Zero rows score -inf in Euclidean geometry.
  std::vector<ScoredId> top_k(const Vector& query, std::size_t k,
                              const std::set<std::string>& exclude = {}) const;

 private:
  std::vector<std::string> ids_;
  Matrix rows_;
  Geometry geometry_ = Geometry::euclidean;
};

/// Versioned binary cache of an index; regenerable from store + taxonomy.
void save_index_cache(const std::filesystem::path& path, const SynsetIndex& index);
SynsetIndex load_index_cache(const std::filesystem::path& path);

}  // namespace taxorank
