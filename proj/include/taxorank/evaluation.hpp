#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "taxorank/dataset.hpp"
#include "taxorank/ranker.hpp"
#include "taxorank/taxonomy.hpp"

namespace taxorank {

/// AP where the gold synsets are grouped into connected components of `t`
/// and each component can be credited once. Only the first `k` predictions
/// count; a prediction in an already-credited component is a miss.
double average_precision_components(std::span<const std::string> preds, const SynsetIdSet& gold,
                                    const Taxonomy& t, std::size_t k = 10);

struct QueryOutcome {
  std::vector<std::string> preds;
  SynsetIdSet gold;
};

double map_score(std::span<const QueryOutcome> queries, const Taxonomy& t, std::size_t k = 10);

/// Fraction of the first k predictions found in the flat gold set.
double precision_at_k(std::span<const std::string> preds, const SynsetIdSet& gold, std::size_t k);

/// Population std of the means of `reps` subsamples of ceil(fraction * N)
/// values drawn without replacement.
double bootstrap_std(std::span<const double> values, double fraction = 0.8, int reps = 30,
                     std::uint64_t seed = 1);

struct EvalReport {
  double map = 0.0;
  double map_std = 0.0;
  std::map<int, double> precision;  // k -> mean P@k
  std::size_t n_queries = 0;
  std::vector<std::pair<std::string, double>> per_query;  // word, AP

  nlohmann::ordered_json to_json() const;
};

/// Scores predictions against a dataset. Dataset words without predictions
/// score 0; predictions for words outside the dataset are ignored.
EvalReport evaluate(const QueryDataset& dataset, const std::vector<PredictionRow>& predictions,
                    const Taxonomy& t, std::size_t k = 10, std::uint64_t seed = 1);

void write_per_query(std::ostream& out, const EvalReport& report);

}  // namespace taxorank
