#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "planted.hpp"
#include "taxorank/errors.hpp"
#include "taxorank/evaluation.hpp"
#include "taxorank/ranker.hpp"

using namespace taxorank;
using namespace taxorank::testing;

namespace {

// T0 synsets in 3-d; "puppy" sits between dog and cat, away from animal.
FixedSpace t0_space() {
  Matrix rows(6, 3);
  rows << 1, 0, 0,    // s1 entity
      0, 1, 0,        // s2 animal
      0.3, 0.5, 1,    // s3 dog
      -0.3, 0.5, 1,   // s4 cat
      0, -1, 0.2,     // s5 plant
      0, -1, -1;      // s6 tree
  std::map<std::string, Vector, std::less<>> words{{"puppy", vec({0.05, 0.5, 1})}, {"sapling", vec({0, -1, -1.1})}};
  const char* lemmas[] = {"entity", "animal", "dog", "cat", "plant", "tree"};
  for (int i = 0; i < 6; ++i) words[lemmas[i]] = rows.row(i).transpose();
  return FixedSpace(SynsetIndex(t0().ids(), rows), std::move(words));
}

const Candidate& find(const CandidateSet& cs, const std::string& id) {
  for (const auto& c : cs.candidates) {
    if (c.id == id) return c;
  }
  throw std::runtime_error("missing candidate " + id);
}

std::vector<std::string> ids_of(const CandidateSet& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs.candidates) out.push_back(c.id);
  return out;
}

}  // namespace

TEST_CASE("candidate generation on T0") {
  auto t = t0();
  auto space = t0_space();
  SUBCASE("two associates share a parent") {
    auto cs = generate_candidates("puppy", space, t, 2);
    REQUIRE(ids_of(cs) == std::vector<std::string>{"s1", "s2", "s3", "s4"});
    CHECK(find(cs, "s2").n() == 2);
    CHECK(find(cs, "s1").n() == 2);
    CHECK(find(cs, "s3").n() == 1);
    for (const auto& p : find(cs, "s2").provenance) CHECK(p.level == 1);
    for (const auto& p : find(cs, "s1").provenance) CHECK(p.level == 2);
  }
  SUBCASE("a root associate contributes only itself") {
    auto cs = generate_candidates("entity", space, t, 1);
    REQUIRE(ids_of(cs) == std::vector<std::string>{"s1"});
    CHECK(find(cs, "s1").provenance == std::vector<Provenance>{{"s1", 0, 1.0}});
  }
  SUBCASE("chain walk from a leaf") {
    auto cs = generate_candidates("sapling", space, t, 1);
    CHECK(ids_of(cs) == std::vector<std::string>{"s1", "s5", "s6"});
  }
  SUBCASE("masked synsets never appear") {
    auto cs = generate_candidates("tree", space, t, 1, {"s6"});
    for (const auto& c : cs.candidates) CHECK(c.id != "s6");
  }
  SUBCASE("unknown query") { CHECK_THROWS_AS(generate_candidates("zebra", space, t), ZeroQueryError); }
}

TEST_CASE("candidate provenance counts a grandparent reached two ways once per level") {
  // d -> b -> a and d -> c -> a, plus d -> a directly.
  auto t = Taxonomy::from_synsets(
      {syn("a", {"a"}), syn("b", {"b"}, {"a"}), syn("c", {"c"}, {"a"}), syn("d", {"d"}, {"a", "b", "c"})});
  Matrix rows = Matrix::Identity(4, 4);
  FixedSpace space(SynsetIndex(t.ids(), rows), {{"q", vec({0, 0, 0, 1})}});
  auto cs = generate_candidates("q", space, t, 1);
  auto a = find(cs, "a");
  REQUIRE(a.n() == 2);
  CHECK(a.provenance[0].level == 1);
  CHECK(a.provenance[1].level == 2);
}

TEST_CASE("feature schema and arithmetic") {
  CHECK(feature_schema().size() == kFeatureCount);
  CHECK(feature_schema()[0] == "n_sim");
  CHECK(feature_schema()[13] == "hypo_min_min");
  CHECK(feature_schema()[21] == "hypo_max_max");

  auto t = t0();
  Matrix rows = Matrix::Zero(6, 2);
  rows.row(2) << 1, std::sqrt(3.0);  // s3: cosine 1/2 with (1, 0)
  FixedSpace space(SynsetIndex(t.ids(), rows), {{"q", vec({1, 0})}});
  CandidateSet cs;
  cs.query = "q";
  cs.query_vector = vec({1, 0});
  Candidate c{"s3", {{"s3", 1, 0.9}, {"s4", 2, 0.8}}};
  cs.candidates = {c};
  auto f = extract_features(c, cs, space, t);
  CHECK(f[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f[5] == 2.0);
  CHECK(f[6] == 2.0);
  CHECK(f[7] == 1.0);
  CHECK(f[8] == 1.5);
  CHECK(f[9] == 2.0);
  for (std::size_t i = 13; i < 22; ++i) CHECK(f[i] == 0.0);
  for (std::size_t i = 1; i <= 4; ++i) CHECK(f[i] == 0.0);
}

TEST_CASE("lemma and hyponym features") {
  auto t = t0();
  auto space = t0_space();
  auto cs = generate_candidates("puppy", space, t, 2);
  auto q = space.query_vector("puppy");
  auto sim = [&](const char* w) { return cosine(q, space.lemma_vector(w).vec); };
  auto f = extract_features(find(cs, "s2"), cs, space, t);
  CHECK(f[10] == doctest::Approx(sim("animal")));
  CHECK(f[12] == doctest::Approx(sim("animal")));
  // s2's hyponyms are s3 and s4, one lemma each.
  double lo = std::min(sim("dog"), sim("cat")), hi = std::max(sim("dog"), sim("cat"));
  CHECK(f[13] == doctest::Approx(lo));
  CHECK(f[14] == doctest::Approx((lo + hi) / 2));
  CHECK(f[15] == doctest::Approx(hi));
  CHECK(f[19] == doctest::Approx(lo));
  CHECK(f[21] == doctest::Approx(hi));

  // Masked hyponyms are skipped.
  auto masked = generate_candidates("puppy", space, t, 2, {"s3"});
  auto fm = extract_features(find(masked, "s2"), masked, space, t);
  CHECK(fm[13] == doctest::Approx(sim("cat")));
  CHECK(fm[15] == doctest::Approx(sim("cat")));
}

TEST_CASE("wiktionary features") {
  std::istringstream in(
      "Puppy\tAnimal|pet\tdoggy\ta young dog or other animal\n"
      "kitten\t\t\t\n");
  auto table = read_wiktionary(in);
  REQUIRE(table.size() == 2);
  CHECK(table.at("puppy").hypernyms == std::vector<std::string>{"animal", "pet"});
  CHECK(table.at("kitten").definition.empty());

  auto t = t0();
  auto space = t0_space();
  auto cs = generate_candidates("puppy", space, t, 2);
  const auto& rec = table.at("puppy");
  auto s2 = extract_features(find(cs, "s2"), cs, space, t, &rec);
  CHECK(s2[1] == 1.0);
  CHECK(s2[2] == 0.0);
  CHECK(s2[3] == 1.0);  // "animal" is in the definition
  CHECK(s2[4] == doctest::Approx(1.0));  // s2 row equals the "animal" vector
  auto s3 = extract_features(find(cs, "s3"), cs, space, t, &rec);
  CHECK(s3[1] == 0.0);
  CHECK(s3[3] == 1.0);  // "dog"

  std::istringstream bad("a\tb\n");
  CHECK_THROWS_AS(read_wiktionary(bad), ParseError);
  std::istringstream dup("a\t\t\t\nA\t\t\t\n");
  CHECK_THROWS_AS(read_wiktionary(dup), ParseError);
}

TEST_CASE("training set from pseudo-queries") {
  auto t = t0();
  auto space = t0_space();
  CHECK(leaf_lemmas(t) == std::vector<std::string>{"cat", "dog", "tree"});
  TrainingConfig cfg;
  cfg.k_assoc = 3;
  auto ts = build_training_set(t, space, {}, cfg);
  CHECK(ts.x.cols() == 22);
  CHECK(ts.x.rows() == ts.y.size());
  CHECK(ts.group.size() == static_cast<std::size_t>(ts.y.size()));
  for (Eigen::Index i = 0; i < ts.y.size(); ++i) CHECK((ts.y[i] == 0.0 || ts.y[i] == 1.0));

  // "dog" with s3 masked: gold {s2, s1}.
  auto it = std::find(ts.queries.begin(), ts.queries.end(), "dog");
  REQUIRE(it != ts.queries.end());
  auto g = static_cast<std::size_t>(it - ts.queries.begin());
  auto cs = generate_candidates("dog", space, t, 3, {"s3"});
  std::size_t row = 0;
  while (ts.group[row] != g) ++row;
  for (const auto& c : cs.candidates) {
    CHECK(ts.y[static_cast<Eigen::Index>(row++)] == ((c.id == "s2" || c.id == "s1") ? 1.0 : 0.0));
  }

  cfg.threads = 3;
  auto again = build_training_set(t, space, {}, cfg);
  CHECK(again.x == ts.x);
  CHECK(again.queries == ts.queries);
}

TEST_CASE("pseudo-queries without a positive are dropped") {
  // Leaves whose only neighbour in the space is an unrelated root.
  auto t = Taxonomy::from_synsets({syn("r1", {"r1"}), syn("r2", {"r2"}), syn("x", {"x"}, {"r1"})});
  Matrix rows(3, 2);
  rows << 1, 0, 0, 1, 5, 5;
  FixedSpace space(SynsetIndex(t.ids(), rows), {{"x", vec({0, 1})}, {"r2", vec({0, 1})}});
  TrainingConfig cfg;
  cfg.k_assoc = 1;
  CHECK_THROWS_AS(build_training_set(t, space, {}, cfg), InsufficientDataError);
}

TEST_CASE("logistic gradient matches finite differences") {
  std::mt19937_64 rng(3);
  Matrix x(30, 4);
  Vector y(30);
  for (Eigen::Index i = 0; i < 30; ++i) {
    x.row(i) = gaussian(rng, 4).transpose();
    y[i] = std::uniform_int_distribution<int>(0, 1)(rng);
  }
  Vector w = gaussian(rng, 4);
  double b = 0.3;
  for (double lambda : {0.0, 0.1, 10.0}) {
    Vector gw;
    double gb = 0;
    logistic_objective(x, y, w, b, lambda, &gw, &gb);
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < 4; ++j) {
      Vector wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      double num = (logistic_objective(x, y, wp, b, lambda) - logistic_objective(x, y, wm, b, lambda)) / (2 * h);
      CHECK(std::abs(num - gw[j]) / std::max(1.0, std::abs(gw[j])) < 1e-6);
    }
    double num_b = (logistic_objective(x, y, w, b + h, lambda) - logistic_objective(x, y, w, b - h, lambda)) / (2 * h);
    CHECK(std::abs(num_b - gb) / std::max(1.0, std::abs(gb)) < 1e-6);
  }
}

TEST_CASE("logistic fit converges and separates") {
  Matrix x(40, 2);
  Vector y(40);
  std::mt19937_64 rng(5);
  for (Eigen::Index i = 0; i < 40; ++i) {
    bool pos = i % 2 == 0;
    x.row(i) = (gaussian(rng, 2, 0.3) + (pos ? vec({2, 2}) : vec({-2, -2}))).transpose();
    y[i] = pos ? 1 : 0;
  }
  for (double l2 : {0.01, 0.1, 1.0}) {
    auto fit = fit_logistic(x, y, l2);
    CHECK(fit.grad_norm <= 1e-6);
    Vector z = (x * fit.w).array() + fit.b;
    for (Eigen::Index i = 0; i < 40; ++i) CHECK((z[i] > 0) == (y[i] == 1));
  }
}

TEST_CASE("ranker training") {
  SUBCASE("constant features learn the class prior") {
    TrainingSet ts;
    ts.x = Matrix::Constant(10, 22, 0.5);
    ts.y = Vector::Zero(10);
    ts.y.head(3).setOnes();
    auto r = train_ranker(ts);
    CHECK(r.weights.isZero());
    CHECK((r.std.array() == 1.0).all());
    FeatureVector f;
    f.fill(0.5);
    double p = 1.0 / (1.0 + std::exp(-r.score(f)));
    CHECK(p == doctest::Approx(0.3).epsilon(1e-6));
  }
  SUBCASE("single class is degenerate") {
    TrainingSet ts;
    ts.x = Matrix::Random(6, 22);
    ts.y = Vector::Ones(6);
    CHECK_THROWS_AS(train_ranker(ts), DegenerateDataError);
  }
  SUBCASE("cross-validation picks from the grid and is seeded") {
    std::mt19937_64 rng(9);
    TrainingSet ts;
    ts.x.resize(60, 22);
    ts.y.resize(60);
    for (Eigen::Index i = 0; i < 60; ++i) {
      ts.x.row(i) = gaussian(rng, 22).transpose();
      ts.y[i] = ts.x(i, 0) + 0.5 * gaussian(rng, 1)[0] > 0 ? 1 : 0;
      ts.group.push_back(static_cast<std::size_t>(i / 4));
    }
    auto r = train_ranker(ts);
    CHECK(r.cv_loss.size() == 4);
    CHECK(r.cv_loss.contains(r.l2));
    CHECK(r.weights[0] > 0);
    auto again = train_ranker(ts);
    CHECK(again.weights == r.weights);
    CHECK(again.l2 == r.l2);
  }
}

TEST_CASE("rank ordering rules") {
  Ranker r;
  r.schema = feature_schema();
  r.weights = Vector::Zero(22);
  r.weights[0] = 1.0;
  r.mean = Vector::Zero(22);
  r.std = Vector::Ones(22);
  CandidateSet cs;
  cs.candidates = {{"b", {}}, {"a", {}}, {"c", {}}};
  std::vector<FeatureVector> f(3);
  for (auto& x : f) x.fill(0.0);
  f[0][0] = 0.9;
  f[1][0] = 0.2;
  f[2][0] = 0.9;
  auto out = rank(r, cs, f, 10);
  REQUIRE(out.size() == 3);
  CHECK(out[0].id == "b");
  CHECK(out[1].id == "c");  // tie with b, id ascending
  CHECK(out[2].id == "a");
  CHECK(rank(r, cs, f, 1).size() == 1);

  // Monotone transform of the score leaves the order alone.
  Ranker scaled = r;
  scaled.weights *= 7.0;
  scaled.bias = -3.0;
  auto out2 = rank(scaled, cs, f, 10);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out2[i].id == out[i].id);

  Ranker wrong = r;
  wrong.schema.pop_back();
  CHECK_THROWS_AS(rank(wrong, cs, f), SchemaMismatchError);
  f.pop_back();
  CHECK_THROWS_AS(rank(r, cs, f), SchemaMismatchError);
}

TEST_CASE("ranker and prediction files round trip") {
  Ranker r;
  r.schema = feature_schema();
  r.weights = Vector::LinSpaced(22, -1.0, 1.0 / 3.0);
  r.mean = Vector::LinSpaced(22, 0.1, 2.2);
  r.std = Vector::Ones(22) * 0.7;
  r.bias = 0.123456789;
  r.l2 = 0.1;
  r.cv_loss = {{0.01, 0.5}, {0.1, 0.25}};
  auto path = std::filesystem::temp_directory_path() / "taxorank_ranker_test.json";
  save_ranker(path, r);
  auto back = load_ranker(path);
  CHECK(back.weights == r.weights);
  CHECK(back.mean == r.mean);
  CHECK(back.bias == r.bias);
  CHECK(back.cv_loss == r.cv_loss);
  std::filesystem::remove(path);

  std::ostringstream out;
  write_predictions(out, "puppy", {{"s2", 1.5}, {"s1", -0.25}});
  CHECK(out.str() == "puppy\t1\ts2\t1.5\npuppy\t2\ts1\t-0.25\n");
  std::istringstream in(out.str());
  auto rows = read_predictions(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].rank == 2);
  CHECK(rows[1].score == -0.25);
  std::istringstream bad("puppy\tx\ts2\t1\n");
  CHECK_THROWS_AS(read_predictions(bad), ParseError);
}

TEST_CASE("planted pipeline beats random ordering") {
  auto planted = make_planted(17, 120, 30);
  WordSpace space(planted.store, planted.taxonomy);
  TrainingConfig cfg;
  auto ranker = train_ranker(build_training_set(planted.taxonomy, space, {}, cfg));
  std::vector<QueryOutcome> outcomes;
  for (std::size_t q = 0; q < planted.queries.size(); ++q) {
    QueryOutcome o;
    for (const auto& s : predict(planted.queries[q], space, planted.taxonomy, ranker, {})) o.preds.push_back(s.id);
    o.gold = planted.gold[q];
    outcomes.push_back(std::move(o));
  }
  CHECK(map_score(outcomes, planted.taxonomy) > 0.5);
}
