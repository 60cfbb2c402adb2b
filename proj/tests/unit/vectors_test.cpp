#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "taxorank/errors.hpp"
#include "taxorank/vectors.hpp"

using namespace taxorank;
using namespace taxorank::testing;

namespace {

VectorStore store_of(std::size_t dim, std::vector<std::pair<std::string, Vector>> rows) {
  VectorStore s(dim);
  for (auto& [t, v] : rows) s.add(t, v);
  return s;
}

}  // namespace

TEST_CASE("load word2vec text") {
  std::istringstream ok("3 2\ndog 1 0\ncat 0 1\ndog 5 5\n");
  // The duplicate still counts as a row in the file.
  auto s = read_vectors(ok);
  CHECK(s.dim() == 2);
  CHECK(s.size() == 2);
  CHECK(*s.find("dog") == vec({1, 0}));

  std::istringstream three("3 2\na 1 0\nb 0 1\nc 1 1\n");
  CHECK(read_vectors(three).size() == 3);

  std::istringstream wide("1 2\na 1 2 3\n");
  CHECK_THROWS_AS(read_vectors(wide), DimensionMismatchError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_vectors(empty), ParseError);
  std::istringstream nan("1 2\na 1 nan\n");
  CHECK_THROWS_AS(read_vectors(nan), ParseError);
  std::istringstream short_file("2 2\na 1 1\n");
  CHECK_THROWS_AS(read_vectors(short_file), ParseError);
}

TEST_CASE("word vector prefix fallback") {
  auto s = store_of(2, {{"dog", vec({1, 0})}, {"dogma", vec({0, 1})}});
  CHECK(s.word_vector("dog").vec == vec({1, 0}));
  auto dogs = s.word_vector("dogs");
  CHECK(dogs.vec == vec({1, 0}));
  CHECK_FALSE(dogs.miss);
  auto zebra = s.word_vector("zebra");
  CHECK(zebra.miss);
  CHECK(zebra.vec == vec({0, 0}));
}

TEST_CASE("phrase vectors average unit vectors") {
  auto s = store_of(2, {{"dog", vec({3, 4})}, {"a", vec({1, 0})}, {"b", vec({0, 1})}});
  auto p = s.phrase_vector("dog");
  CHECK(p.vec[0] == doctest::Approx(0.6));
  CHECK(p.vec[1] == doctest::Approx(0.8));
  CHECK(s.phrase_vector("a b").vec == vec({0.5, 0.5}));
  auto miss = s.phrase_vector("zzz qqq");
  CHECK(miss.miss);
  CHECK(miss.vec.norm() == 0.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<> g;
  VectorStore big(5);
  for (int i = 0; i < 20; ++i) {
    Vector v(5);
    for (auto& x : v) x = g(rng);
    big.add("t" + std::to_string(i), v);
  }
  for (int i = 0; i < 50; ++i) {
    std::string phrase = "t" + std::to_string(i % 20) + " t" + std::to_string((i * 7) % 20) + " zz";
    CHECK(big.phrase_vector(phrase).vec.norm() <= 1.0 + 1e-12);
  }
}

TEST_CASE("synset vectors") {
  auto s = store_of(2, {{"dog", vec({3, 4})}, {"a", vec({1, 0})}, {"b", vec({0, 1})}});
  CHECK(s.synset_vector(syn("x", {"dog"})).vec == s.phrase_vector("dog").vec);
  CHECK(s.synset_vector(syn("x", {"a", "b"})).vec == vec({0.5, 0.5}));
  auto miss = s.synset_vector(syn("x", {"qq", "zz"}));
  CHECK(miss.miss);
  CHECK(miss.vec.norm() == 0.0);
}

TEST_CASE("top-k synset search") {
  SynsetIndex idx({"s3", "s4", "s5"}, (Matrix(3, 2) << 1, 0, 0.9, 0.1, 0, 0).finished());
  auto top = idx.top_k(vec({1, 0}), 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].id == "s3");
  CHECK(top[0].score == doctest::Approx(1.0));
  CHECK(top[1].id == "s4");
  CHECK(top[1].score == doctest::Approx(0.9 / std::sqrt(0.82)).epsilon(1e-12));

  auto all = idx.top_k(vec({1, 0}), 10);
  REQUIRE(all.size() == 3);
  CHECK(all[2].id == "s5");
  CHECK(std::isinf(all[2].score));
  CHECK_THROWS_AS(idx.top_k(vec({0, 0}), 1), ZeroQueryError);

  auto excl = idx.top_k(vec({1, 0}), 1, {"s3"});
  CHECK(excl[0].id == "s4");
}

TEST_CASE("top-k ties broken by id") {
  SynsetIndex idx({"b", "a", "c"}, (Matrix(3, 2) << 1, 0, 1, 0, 1, 0).finished());
  auto top = idx.top_k(vec({2, 0}), 3);
  CHECK(top[0].id == "a");
  CHECK(top[1].id == "b");
  CHECK(top[2].id == "c");
}

TEST_CASE("top-k agrees with brute-force scan") {
  std::mt19937_64 rng(11);
  std::normal_distribution<> g;
  const int n = 40, d = 6;
  std::vector<std::string> ids;
  Matrix rows(n, d);
  for (int i = 0; i < n; ++i) {
    ids.push_back("id" + std::to_string(i));
    for (int j = 0; j < d; ++j) rows(i, j) = g(rng);
  }
  SynsetIndex idx(ids, rows);
  for (int trial = 0; trial < 10; ++trial) {
    Vector q(d);
    for (auto& x : q) x = g(rng);
    auto ranked = idx.top_k(q, n);
    REQUIRE(ranked.size() == static_cast<std::size_t>(n));
    for (std::size_t i = 0; i + 1 < ranked.size(); ++i) {
      CHECK(cosine(q, idx.row(ranked[i].id)) >= cosine(q, idx.row(ranked[i + 1].id)) - 1e-12);
    }
  }
  for (int i = 0; i < n; ++i) {
    Vector u = rows.row(i).transpose();
    CHECK(cosine(u, u) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("index built from a store and taxonomy; upsert; cache") {
  auto s = store_of(2, {{"entity", vec({1, 1})}, {"animal", vec({1, 0})}, {"dog", vec({0.9, 0.1})},
                        {"cat", vec({0.8, 0.2})}, {"plant", vec({0, 1})}, {"tree", vec({0.1, 0.9})}});
  auto t = t0();
  auto idx = SynsetIndex::build(s, t);
  CHECK(idx.size() == 6);
  CHECK(idx.top_k(idx.row("s3"), 1)[0].id == "s3");
  CHECK(idx.top_k(idx.row("s3"), 1)[0].score == doctest::Approx(1.0));

  idx.upsert("new-1", vec({0, -1}));
  CHECK(idx.size() == 7);
  CHECK(idx.ids().front() == "new-1");
  CHECK(idx.row("new-1") == vec({0, -1}));
  CHECK(idx.row("s6") == SynsetIndex::build(s, t).row("s6"));

  auto path = std::filesystem::temp_directory_path() / "taxorank_index_cache.bin";
  save_index_cache(path, idx);
  auto back = load_index_cache(path);
  CHECK(back.ids() == idx.ids());
  CHECK(back.rows() == idx.rows());
  std::filesystem::remove(path);
}

TEST_CASE("write_vectors round trips values") {
  Matrix m(2, 3);
  m << 0.1, -2.5, 1e-17, 3, 4, 1.0 / 3.0;
  std::ostringstream out;
  write_vectors(out, {"a", "b"}, m);
  std::istringstream in(out.str());
  auto s = read_vectors(in);
  CHECK(*s.find("b") == Vector(m.row(1).transpose()));
  CHECK(*s.find("a") == Vector(m.row(0).transpose()));
}
