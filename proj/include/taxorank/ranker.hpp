#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "taxorank/space.hpp"
#include "taxorank/taxonomy.hpp"

namespace taxorank {

struct Provenance {
  std::string associate;
  int level;  // 0 associate itself, 1 parent, 2 grandparent
  double similarity;

  bool operator==(const Provenance&) const = default;
};

struct Candidate {
  std::string id;
  std::vector<Provenance> provenance;

  std::size_t n() const { return provenance.size(); }
};

struct CandidateSet {
  std::string query;
  Vector query_vector;
  SynsetIdSet mask;
  std::vector<Candidate> candidates;  // sorted by id
};

/// Retrieves the `k_assoc` nearest synsets to the query and pools them with
/// their parents and grandparents. A candidate gets one provenance entry per
/// distinct (associate, level) derivation. Masked synsets never appear.
CandidateSet generate_candidates(std::string_view query, const Space& space, const Taxonomy& t,
                                 std::size_t k_assoc = 10, const SynsetIdSet& mask = {});

struct WiktionaryRecord {
  std::string word;
  std::vector<std::string> hypernyms;
  std::vector<std::string> synonyms;
  std::vector<std::string> definition;  // lowercased whitespace tokens
};

using WiktionaryTable = std::map<std::string, WiktionaryRecord, std::less<>>;

/// word TAB hypernyms TAB synonyms TAB definition, lists joined with '|'.
WiktionaryTable read_wiktionary(std::istream& in);
WiktionaryTable load_wiktionary(const std::filesystem::path& path);

inline constexpr std::size_t kFeatureCount = 22;
using FeatureVector = std::array<double, kFeatureCount>;

const std::vector<std::string>& feature_schema();

FeatureVector extract_features(const Candidate& c, const CandidateSet& cs, const Space& space, const Taxonomy& t,
                               const WiktionaryRecord* wikt = nullptr);

struct TrainingConfig {
  std::size_t n_pseudo = 1000;
  std::size_t k_assoc = 10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct TrainingSet {
  Matrix x;  // one row per candidate
  Vector y;
  std::vector<std::size_t> group;    // pseudo-query index of each row
  std::vector<std::string> queries;  // pseudo-queries that were kept
};

/// Leaf lemmas whose senses are all leaves, sorted.
std::vector<std::string> leaf_lemmas(const Taxonomy& t);

/// Samples leaf lemmas as pseudo-queries, hides their own synsets, and labels
/// each candidate by membership in their first- and second-order hypernyms.
/// Pseudo-queries without a positive candidate are dropped.
TrainingSet build_training_set(const Taxonomy& t, const Space& space, const WiktionaryTable& wikt,
                               const TrainingConfig& cfg);

struct LogisticFit {
  Vector w;
  double b = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
};

/// Sum of log-losses plus lambda/2 |w|^2 (bias unregularised). Gradient is
/// written when the pointers are set.
double logistic_objective(const Matrix& x, const Vector& y, const Vector& w, double b, double lambda,
                          Vector* grad_w = nullptr, double* grad_b = nullptr);

/// Newton's method with backtracking to gradient norm `tol`.
LogisticFit fit_logistic(const Matrix& x, const Vector& y, double lambda, double tol = 1e-6,
                         int max_iterations = 1000);

struct RankerConfig {
  std::vector<double> l2_grid{0.01, 0.1, 1.0, 10.0};
  int folds = 5;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int max_iterations = 1000;
};

struct Ranker {
  std::vector<std::string> schema;
  Vector weights;
  double bias = 0.0;
  Vector mean;
  Vector std;
  double l2 = 1.0;
  std::map<double, double> cv_loss;  // l2 -> mean held-out log-loss

  /// Linear decision value on raw (unscaled) features.
  double score(const FeatureVector& f) const;
};

/// z-scores the features, picks the L2 strength by grouped k-fold
/// cross-validation, and refits on everything.
Ranker train_ranker(const TrainingSet& data, const RankerConfig& cfg = {});

/// Scores each candidate, sorts by score descending then id, keeps `k`.
std::vector<ScoredId> rank(const Ranker& r, const CandidateSet& cs, const std::vector<FeatureVector>& features,
                           std::size_t k = 10);

/// Full pipeline for one query word.
std::vector<ScoredId> predict(std::string_view word, const Space& space, const Taxonomy& t, const Ranker& r,
                              const WiktionaryTable& wikt, std::size_t k = 10, std::size_t k_assoc = 10);

void save_ranker(const std::filesystem::path& path, const Ranker& r);
Ranker load_ranker(const std::filesystem::path& path);

/// "word TAB rank TAB synset_id TAB score", rank 1-based.
void write_predictions(std::ostream& out, std::string_view word, const std::vector<ScoredId>& ranked);

struct PredictionRow {
  std::string word;
  std::size_t rank;
  std::string synset_id;
  double score;
};
std::vector<PredictionRow> read_predictions(std::istream& in);

}  // namespace taxorank
