#include "taxorank/space.hpp"

#include "taxorank/errors.hpp"

namespace taxorank {

void Space::add_synset(const Synset& synset) {
  throw ConfigError("cannot index synset " + synset.id + " in a " + std::string(kind()) + " space");
}

WordSpace::WordSpace(std::shared_ptr<const VectorStore> store, const Taxonomy& t) : store_(std::move(store)) {
  index_ = SynsetIndex::build(*store_, t);
}

Vector WordSpace::query_vector(std::string_view word, const SynsetIdSet&) const {
  auto l = store_->phrase_vector(word);
  if (l.miss) throw ZeroQueryError("no vector for '" + std::string(word) + "'");
  return l.vec;
}

Lookup WordSpace::lemma_vector(std::string_view lemma, const SynsetIdSet&) const {
  return store_->phrase_vector(lemma);
}

void WordSpace::add_synset(const Synset& synset) { index_.upsert(synset.id, store_->synset_vector(synset).vec); }

GraphSpace::GraphSpace(GraphContext ctx) : ctx_(std::move(ctx)) { index_ = ctx_.emb->index; }

Vector GraphSpace::query_vector(std::string_view word, const SynsetIdSet& mask) const {
  return project_oov(normalize_lemma(word), *ctx_.store, *ctx_.text_index, *ctx_.emb, ctx_.gcn.get(), mask);
}

Lookup GraphSpace::lemma_vector(std::string_view lemma, const SynsetIdSet& mask) const {
  return ctx_.lemma_vector(lemma, mask);
}

MetaEmbeddingSpace::MetaEmbeddingSpace(std::shared_ptr<const MetaSpace> meta, const Taxonomy& t)
    : meta_(std::move(meta)) {
  auto ids = t.ids();
  Matrix rows(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(meta_->dim()));
  for (std::size_t i = 0; i < ids.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = synset_row(t.at(ids[i]));
  index_ = SynsetIndex(std::move(ids), std::move(rows));
}

Vector MetaEmbeddingSpace::synset_row(const Synset& synset) const {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(meta_->dim()));
  std::size_t hits = 0;
  for (const auto& w : synset.words) {
    auto l = lemma_vector(w);
    if (l.miss) continue;
    sum += l.vec;
    ++hits;
  }
  return hits == 0 ? sum : Vector(sum / static_cast<double>(hits));
}

Vector MetaEmbeddingSpace::query_vector(std::string_view word, const SynsetIdSet& mask) const {
  try {
    return meta_->encode(word, mask);
  } catch (const MissError&) {
    throw ZeroQueryError("no meta vector for '" + std::string(word) + "'");
  }
}

Lookup MetaEmbeddingSpace::lemma_vector(std::string_view lemma, const SynsetIdSet& mask) const {
  try {
    return {meta_->encode(lemma, mask), false};
  } catch (const MissError&) {
    return {Vector::Zero(static_cast<Eigen::Index>(meta_->dim())), true};
  }
}

void MetaEmbeddingSpace::add_synset(const Synset& synset) { index_.upsert(synset.id, synset_row(synset)); }

}  // namespace taxorank
