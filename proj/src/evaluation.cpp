#include "taxorank/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include <fmt/format.h>

#include "taxorank/errors.hpp"

namespace taxorank {

namespace {

// (1/M) * sum_h h / rank_h. Computed as a reduced fraction while the common
// denominator fits, so textbook values such as 7/12 come out correctly rounded.
double ap_from_hits(const std::vector<std::size_t>& ranks, std::size_t m) {
  if (ranks.empty()) return 0.0;
  std::uint64_t lcm = 1;
  bool exact = true;
  for (auto r : ranks) {
    auto next = std::lcm(lcm, static_cast<std::uint64_t>(r));
    if (next > (std::uint64_t{1} << 40)) {
      exact = false;
      break;
    }
    lcm = next;
  }
  if (exact && m < (std::uint64_t{1} << 12)) {
    std::uint64_t num = 0;
    for (std::size_t h = 0; h < ranks.size(); ++h) num += (h + 1) * (lcm / ranks[h]);
    std::uint64_t den = lcm * m;
    auto g = std::gcd(num, den);
    num /= g;
    den /= g;
    if (num < (std::uint64_t{1} << 53) && den < (std::uint64_t{1} << 53)) {
      return static_cast<double>(num) / static_cast<double>(den);
    }
  }
  long double sum = 0.0L;
  for (std::size_t h = 0; h < ranks.size(); ++h) sum += static_cast<long double>(h + 1) / ranks[h];
  return static_cast<double>(sum / m);
}

}  // namespace

double average_precision_components(std::span<const std::string> preds, const SynsetIdSet& gold,
                                    const Taxonomy& t, std::size_t k) {
  if (gold.empty()) throw EmptyGoldError("gold set is empty");
  std::set<std::string_view> seen;
  for (const auto& p : preds) {
    if (!seen.insert(p).second) throw DuplicatePredictionError("duplicate prediction " + p);
  }
  auto components = t.connected_components(gold);
  std::map<std::string_view, std::size_t> component_of;
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (const auto& id : components[c]) component_of.emplace(id, c);
  }

  std::vector<bool> credited(components.size(), false);
  const std::size_t limit = std::min(k, preds.size());
  std::vector<std::size_t> hit_ranks;
  for (std::size_t j = 0; j < limit; ++j) {
    auto it = component_of.find(preds[j]);
    if (it == component_of.end() || credited[it->second]) continue;
    credited[it->second] = true;
    hit_ranks.push_back(j + 1);
  }
  return ap_from_hits(hit_ranks, components.size());
}

double map_score(std::span<const QueryOutcome> queries, const Taxonomy& t, std::size_t k) {
  if (queries.empty()) throw EmptyDatasetError("no queries to score");
  double sum = 0.0;
  for (const auto& q : queries) sum += average_precision_components(q.preds, q.gold, t, k);
  return sum / static_cast<double>(queries.size());
}

double precision_at_k(std::span<const std::string> preds, const SynsetIdSet& gold, std::size_t k) {
  if (k == 0) throw ConfigError("precision@k needs k >= 1");
  const std::size_t limit = std::min(k, preds.size());
  std::size_t correct = 0;
  for (std::size_t j = 0; j < limit; ++j) correct += gold.contains(preds[j]) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(k);
}

double bootstrap_std(std::span<const double> values, double fraction, int reps, std::uint64_t seed) {
  if (values.size() < 2) throw InsufficientDataError("bootstrap needs at least two values");
  if (!(fraction > 0) || fraction > 1 || reps < 1) throw ConfigError("bootstrap: bad fraction or repetitions");
  const auto n = values.size();
  const auto m = std::min(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-12)));
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(n);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: the first m slots form the subsample.
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
      sum += values[idx[i]];
    }
    means.push_back(sum / static_cast<double>(m));
  }
  // Shifted by the first mean so identical means give exactly zero.
  const double shift = means.front();
  double s1 = 0.0, s2 = 0.0;
  for (double x : means) {
    s1 += x - shift;
    s2 += (x - shift) * (x - shift);
  }
  const double reps_d = static_cast<double>(means.size());
  return std::sqrt(std::max(0.0, s2 / reps_d - (s1 / reps_d) * (s1 / reps_d)));
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["map"] = map;
  j["map_std"] = map_std;
  nlohmann::ordered_json p;
  for (const auto& [k, v] : precision) p[std::to_string(k)] = v;
  j["precision"] = std::move(p);
  j["n_queries"] = n_queries;
  return j;
}

EvalReport evaluate(const QueryDataset& dataset, const std::vector<PredictionRow>& predictions, const Taxonomy& t,
                    std::size_t k, std::uint64_t seed) {
  if (dataset.entries.empty()) throw EmptyDatasetError("dataset has no queries");
  std::map<std::string, std::vector<std::pair<std::size_t, std::string>>> by_word;
  for (const auto& row : predictions) by_word[row.word].emplace_back(row.rank, row.synset_id);

  EvalReport report;
  report.n_queries = dataset.entries.size();
  std::vector<double> aps;
  for (int p : {1, 2, 3}) report.precision[p] = 0.0;
  for (const auto& e : dataset.entries) {
    std::vector<std::string> preds;
    if (auto it = by_word.find(e.word); it != by_word.end()) {
      auto rows = it->second;
      std::sort(rows.begin(), rows.end());
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first == rows[i - 1].first) {
          throw ParseError("predictions for '" + e.word + "' repeat rank " + std::to_string(rows[i].first));
        }
      }
      for (auto& [rank, id] : rows) preds.push_back(std::move(id));
    }
    double ap = average_precision_components(preds, e.gold_ids, t, k);
    aps.push_back(ap);
    report.per_query.emplace_back(e.word, ap);
    for (int p : {1, 2, 3}) report.precision[p] += precision_at_k(preds, e.gold_ids, static_cast<std::size_t>(p));
  }
  const double n = static_cast<double>(aps.size());
  report.map = std::accumulate(aps.begin(), aps.end(), 0.0) / n;
  for (auto& [p, v] : report.precision) v /= n;
  report.map_std = aps.size() < 2 ? 0.0 : bootstrap_std(aps, 0.8, 30, seed);
  return report;
}

void write_per_query(std::ostream& out, const EvalReport& report) {
  for (const auto& [word, ap] : report.per_query) out << fmt::format("{}\t{}\n", word, ap);
}

}  // namespace taxorank
