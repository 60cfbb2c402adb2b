#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "taxorank/errors.hpp"
#include "taxorank/evaluation.hpp"

using namespace taxorank;
using namespace taxorank::testing;

namespace {

using Ids = std::vector<std::string>;

// Textbook AP: every gold synset is its own relevant item.
double classical_ap(const Ids& preds, const SynsetIdSet& gold) {
  double hits = 0.0, sum = 0.0;
  for (std::size_t j = 0; j < preds.size(); ++j) {
    if (gold.contains(preds[j])) {
      hits += 1.0;
      sum += hits / static_cast<double>(j + 1);
    }
  }
  return sum / static_cast<double>(gold.size());
}

}  // namespace

TEST_CASE("component AP worked values") {
  auto t = t0();
  CHECK(average_precision_components(Ids{"s3", "s5"}, {"s3", "s2"}, t) == 1.0);
  // {s3} and {s6} are separate components; hits at ranks 2 and 3.
  CHECK(average_precision_components(Ids{"s5", "s3", "s6"}, {"s3", "s6"}, t) == 7.0 / 12.0);
  CHECK(average_precision_components(Ids{"s5", "s4"}, {"s3", "s6"}, t) == 0.0);
  CHECK(average_precision_components(Ids{}, {"s3"}, t) == 0.0);
}

TEST_CASE("component AP credits each component once") {
  auto t = t0();
  CHECK(average_precision_components(Ids{"s3", "s2"}, {"s3", "s2"}, t) == 1.0);
  CHECK(average_precision_components(Ids{"s5", "s3", "s2"}, {"s3", "s2"}, t) == 0.5);
  // Only the first k predictions count.
  CHECK(average_precision_components(Ids{"s5", "s3"}, {"s3"}, t, 1) == 0.0);
}

TEST_CASE("component AP errors") {
  auto t = t0();
  CHECK_THROWS_AS(average_precision_components(Ids{"s3", "s3"}, {"s3"}, t), DuplicatePredictionError);
  CHECK_THROWS_AS(average_precision_components(Ids{"s3"}, {}, t), EmptyGoldError);
}

TEST_CASE("component AP reduces to classical AP on disconnected gold") {
  std::mt19937_64 rng(42);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto t = random_dag(rng, 15);
    auto ids = t.ids();
    std::shuffle(ids.begin(), ids.end(), rng);
    SynsetIdSet gold;
    for (const auto& id : ids) {
      bool adjacent = false;
      for (const auto& g : gold) {
        const auto& hs = t.at(id).hypernym_ids;
        const auto& gs = t.at(g).hypernym_ids;
        adjacent = adjacent || std::find(hs.begin(), hs.end(), g) != hs.end() ||
                   std::find(gs.begin(), gs.end(), id) != gs.end();
      }
      if (!adjacent && gold.size() < 4) gold.insert(id);
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    Ids preds(ids.begin(), ids.begin() + 8);
    CHECK(average_precision_components(preds, gold, t) == doctest::Approx(classical_ap(preds, gold)).epsilon(1e-15));
    ++checked;
  }
  CHECK(checked == 300);
}

TEST_CASE("moving a hit earlier never lowers AP") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto t = random_dag(rng, 12);
    auto ids = t.ids();
    std::shuffle(ids.begin(), ids.end(), rng);
    SynsetIdSet gold(ids.begin(), ids.begin() + 3);
    std::shuffle(ids.begin(), ids.end(), rng);
    Ids preds(ids.begin(), ids.begin() + 8);
    for (std::size_t j = 1; j < preds.size(); ++j) {
      if (!gold.contains(preds[j])) continue;
      auto moved = preds;
      std::swap(moved[j - 1], moved[j]);
      // Only meaningful when the hit moves past a non-gold prediction.
      if (gold.contains(preds[j - 1])) continue;
      CHECK(average_precision_components(moved, gold, t) >= average_precision_components(preds, gold, t) - 1e-15);
    }
  }
}

TEST_CASE("MAP and precision@k") {
  auto t = t0();
  std::vector<QueryOutcome> qs{{{"s3"}, {"s3"}}, {{"s5"}, {"s3"}}};
  CHECK(map_score(qs, t) == 0.5);
  std::vector<QueryOutcome> one{{{"s5", "s3", "s6"}, {"s3", "s6"}}};
  CHECK(map_score(one, t) == 7.0 / 12.0);
  std::reverse(qs.begin(), qs.end());
  CHECK(map_score(qs, t) == 0.5);

  CHECK(precision_at_k(Ids{"s2", "s5"}, {"s2", "s1"}, 2) == 0.5);
  CHECK(precision_at_k(Ids{"s2", "s1"}, {"s2", "s1"}, 2) == 1.0);
  CHECK(precision_at_k(Ids{"s2"}, {"s2", "s1"}, 3) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(precision_at_k(Ids{"s2"}, {"s2"}, 0), ConfigError);
}

TEST_CASE("bootstrap std") {
  std::vector<double> constant(10, 0.4);
  CHECK(bootstrap_std(constant) == 0.0);
  std::vector<double> two{0.0, 1.0};
  CHECK(bootstrap_std(two) == 0.0);
  std::vector<double> spread{0.1, 0.9, 0.3, 0.5, 0.7, 0.2, 0.0, 1.0};
  double a = bootstrap_std(spread, 0.8, 30, 5);
  CHECK(a > 0.0);
  CHECK(bootstrap_std(spread, 0.8, 30, 5) == a);
  std::vector<double> single{0.5};
  CHECK_THROWS_AS(bootstrap_std(single), InsufficientDataError);
}

TEST_CASE("evaluate a prediction file") {
  auto t = t0();
  QueryDataset ds;
  ds.entries = {{"kitten", {"s2", "s1"}}, {"oak", {"s5", "s1"}}, {"puppy", {"s2", "s1"}}};
  std::istringstream preds("puppy\t1\ts2\t3.5\npuppy\t2\ts3\t1\noak\t2\ts5\t0.1\noak\t1\ts6\t0.2\nzzz\t1\ts1\t0\n");
  auto rows = read_predictions(preds);
  auto report = evaluate(ds, rows, t);
  CHECK(report.n_queries == 3);
  // kitten 0, oak 1/2, puppy 1 (s2 and s1 form one component).
  CHECK(report.map == doctest::Approx(0.5));
  CHECK(report.precision.at(1) == doctest::Approx(1.0 / 3.0));
  CHECK(report.precision.at(2) == doctest::Approx((0.0 + 0.5 + 0.5) / 3.0));
  CHECK(report.map_std >= 0.0);
  auto j = report.to_json();
  CHECK(j.contains("map"));
  CHECK(j["precision"].contains("3"));
  std::ostringstream per;
  write_per_query(per, report);
  CHECK(per.str() == "kitten\t0\noak\t0.5\npuppy\t1\n");

  QueryDataset lone;
  lone.entries = {{"puppy", {"s2"}}};
  CHECK(evaluate(lone, rows, t).map_std == 0.0);
}
