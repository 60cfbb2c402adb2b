#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "taxorank/errors.hpp"
#include "taxorank/meta.hpp"
#include "taxorank/space.hpp"
#include "taxorank/taxonomy.hpp"
#include "taxorank/vectors.hpp"

namespace taxorank::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(TAXORANK_TEST_DATA) / name;
}

inline Synset syn(std::string id, std::vector<std::string> words,
                  std::vector<std::string> parents = {}) {
  return Synset{std::move(id), Pos::noun, std::move(words), std::move(parents)};
}

// s1 entity <- s2 animal <- {s3 dog, s4 cat};  s1 <- s5 plant <- s6 tree
inline Taxonomy t0() {
  return Taxonomy::from_synsets({
      syn("s1", {"entity"}),
      syn("s2", {"animal"}, {"s1"}),
      syn("s3", {"dog"}, {"s2"}),
      syn("s4", {"cat"}, {"s2"}),
      syn("s5", {"plant"}, {"s1"}),
      syn("s6", {"tree"}, {"s5"}),
  });
}

inline Taxonomy parse(const std::string& jsonl) {
  std::istringstream in(jsonl);
  return read_taxonomy(in);
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

/// Random forest of `n` synsets: each node after the first picks up to two
/// earlier nodes as parents, so the result is always a DAG.
inline Taxonomy random_dag(std::mt19937_64& rng, std::size_t n, double second_parent = 0.2) {
  std::vector<Synset> out;
  for (std::size_t i = 0; i < n; ++i) {
    Synset s = syn("n" + std::to_string(100 + i), {"w" + std::to_string(i)});
    if (i > 0 && std::uniform_real_distribution<>(0, 1)(rng) < 0.9) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      auto p = pick(rng);
      s.hypernym_ids.push_back(out[p].id);
      if (std::uniform_real_distribution<>(0, 1)(rng) < second_parent) {
        auto q = pick(rng);
        if (q != p) s.hypernym_ids.push_back(out[q].id);
      }
    }
    out.push_back(std::move(s));
  }
  return Taxonomy::from_synsets(std::move(out));
}

inline std::shared_ptr<VectorStore> make_store(const std::map<std::string, Vector>& rows) {
  auto store = std::make_shared<VectorStore>(static_cast<std::size_t>(rows.begin()->second.size()));
  for (const auto& [tok, v] : rows) store->add(tok, v);
  return store;
}

inline Source store_source(std::string name, std::shared_ptr<const VectorStore> store) {
  Source s;
  s.name = std::move(name);
  s.dim = store->dim();
  s.lookup = [store](std::string_view tok, const SynsetIdSet&) { return store->phrase_vector(tok); };
  return s;
}

inline Vector gaussian(std::mt19937_64& rng, std::size_t dim, double sigma = 1.0) {
  std::normal_distribution<double> g(0.0, sigma);
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(rng);
  return v;
}

/// A space with hand-picked synset rows and word vectors.
class FixedSpace : public Space {
 public:
  FixedSpace(SynsetIndex index, std::map<std::string, Vector, std::less<>> words) : words_(std::move(words)) {
    index_ = std::move(index);
  }

  std::string_view kind() const override { return "fixed"; }
  Vector query_vector(std::string_view word, const SynsetIdSet& = {}) const override {
    auto it = words_.find(word);
    if (it == words_.end()) throw ZeroQueryError(std::string(word));
    return it->second;
  }
  Lookup lemma_vector(std::string_view lemma, const SynsetIdSet& = {}) const override {
    auto it = words_.find(lemma);
    if (it == words_.end()) return {Vector::Zero(static_cast<Eigen::Index>(index_.dim())), true};
    return {it->second, false};
  }

 private:
  std::map<std::string, Vector, std::less<>> words_;
};

}  // namespace taxorank::testing
