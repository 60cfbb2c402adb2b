#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "taxorank/errors.hpp"
#include "taxorank/taxonomy.hpp"

using namespace taxorank;
using namespace taxorank::testing;

TEST_CASE("load toy taxonomy from disk") {
  auto t = load_taxonomy(data_path("t0.jsonl"));
  CHECK(t.size() == 6);
  CHECK(t.edge_count() == 5);
  CHECK(t.pos() == Pos::noun);
  CHECK(t == t0());
}

TEST_CASE("two-node cycle is rejected") {
  CHECK_THROWS_AS(parse(R"({"id":"s1","pos":"n","words":["a"],"hypernyms":["s2"]}
{"id":"s2","pos":"n","words":["b"],"hypernyms":["s1"]}
{"id":"s3","pos":"n","words":["c"],"hypernyms":[]})"),
                  CycleError);
}

TEST_CASE("cycle error names a synset on the cycle") {
  try {
    parse(R"({"id":"r","pos":"n","words":["r"],"hypernyms":[]}
{"id":"x","pos":"n","words":["x"],"hypernyms":["a"]}
{"id":"a","pos":"n","words":["a"],"hypernyms":["b"]}
{"id":"b","pos":"n","words":["b"],"hypernyms":["a"]})");
    FAIL("expected CycleError");
  } catch (const CycleError& e) {
    std::string msg = e.what();
    CHECK((msg.find("synset a") != std::string::npos || msg.find("synset b") != std::string::npos));
  }
}

TEST_CASE("dangling hypernym is rejected") {
  CHECK_THROWS_AS(parse(R"({"id":"s1","pos":"n","words":["a"],"hypernyms":[]}
{"id":"s3","pos":"n","words":["c"],"hypernyms":["s9"]})"),
                  DanglingEdgeError);
}

TEST_CASE("malformed line reports its line number") {
  try {
    parse("{\"id\":\"s1\",\"pos\":\"n\",\"words\":[\"a\"],\"hypernyms\":[]}\n{not json\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse(R"({"id":"s1","pos":"n","words":[],"hypernyms":[]})"), ParseError);
  CHECK_THROWS_AS(parse(R"({"id":"s1","pos":"a","words":["x"],"hypernyms":[]})"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("lemmas are normalised on load") {
  auto t = parse(R"({"id":"s1","pos":"n","words":["  Hot   Dog "],"hypernyms":[]})");
  CHECK(t.at("s1").words == std::vector<std::string>{"hot dog"});
  CHECK(t.has_lemma("hot dog"));
}

TEST_CASE("hypernyms by order") {
  auto t = t0();
  CHECK(t.hypernyms("s3", 2) == std::map<std::string, int>{{"s2", 1}, {"s1", 2}});
  CHECK(t.hypernyms("s1", 2).empty());
  CHECK(t.hypernyms("s3", 1) == std::map<std::string, int>{{"s2", 1}});
  CHECK_THROWS_AS(t.hypernyms("s9", 2), UnknownSynsetError);

  auto diamond = Taxonomy::from_synsets(
      {syn("r", {"r"}), syn("a", {"a"}, {"r"}), syn("b", {"b"}, {"r"}), syn("x", {"x"}, {"a", "b"})});
  CHECK(diamond.hypernyms("x", 2) == std::map<std::string, int>{{"a", 1}, {"b", 1}, {"r", 2}});
}

TEST_CASE("hyponyms are sorted children") {
  auto t = t0();
  CHECK(t.hyponyms("s2") == std::vector<std::string>{"s3", "s4"});
  CHECK(t.hyponyms("s3").empty());
  CHECK(t.hyponyms("s1") == std::vector<std::string>{"s2", "s5"});
  CHECK_THROWS_AS(t.hyponyms("nope"), UnknownSynsetError);
}

TEST_CASE("connected components of induced subgraphs") {
  auto t = t0();
  CHECK(t.connected_components({"s2", "s1", "s5"}) == std::vector<SynsetIdSet>{{"s1", "s2", "s5"}});
  CHECK(t.connected_components({"s3", "s6"}) == std::vector<SynsetIdSet>{{"s3"}, {"s6"}});
  CHECK(t.connected_components({"s3"}) == std::vector<SynsetIdSet>{{"s3"}});
  CHECK_THROWS_AS(t.connected_components({"s3", "zz"}), UnknownSynsetError);
}

TEST_CASE("attach adds a leaf and leaves the original untouched") {
  auto t = t0();
  std::vector<std::string> parents{"s3"};
  auto [t1, id] = t.attach("puppy", parents);
  CHECK(t1.size() == 7);
  CHECK(t.size() == 6);
  CHECK(id == "new-1");
  CHECK(t1.at(id).hypernym_ids == parents);
  CHECK(t1.hyponyms("s3") == std::vector<std::string>{id});
  CHECK(t1.synsets_of("puppy").size() == 1);
  for (const auto& [sid, s] : t.synsets()) CHECK(t1.at(sid) == s);

  std::vector<std::string> two{"s3", "s4"};
  auto [t2, id2] = t1.attach("mutt", two);
  CHECK(id2 == "new-2");
  CHECK(t2.at(id2).hypernym_ids.size() == 2);

  std::vector<std::string> bad{"s9"};
  CHECK_THROWS_AS(t.attach("x", bad), UnknownSynsetError);
}

TEST_CASE("saved taxonomy round-trips byte-identically") {
  std::vector<std::string> parents{"s3"};
  auto t = t0().attach("puppy", parents).taxonomy;
  std::ostringstream a;
  write_taxonomy(a, t);
  auto reloaded = parse(a.str());
  std::ostringstream b;
  write_taxonomy(b, reloaded);
  CHECK(a.str() == b.str());
  CHECK(reloaded == t);
  // The id counter survives a reload.
  CHECK(reloaded.attach("kitten", parents).id == "new-2");
}

TEST_CASE("random DAG properties") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    auto t = random_dag(rng, 25, 0.3);
    auto order = t.topological_order();
    REQUIRE(order.size() == t.size());
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (const auto& [id, s] : t.synsets()) {
      for (const auto& h : s.hypernym_ids) CHECK(pos[id] < pos[h]);
      // Orders agree across depth limits.
      auto h3 = t.hypernyms(id, 3);
      auto h2 = t.hypernyms(id, 2);
      std::map<std::string, int> restricted;
      for (const auto& [k, v] : h3) {
        if (v <= 2) restricted.emplace(k, v);
      }
      CHECK(restricted == h2);
      // Hyponym / hypernym duality.
      for (const auto& child : t.hyponyms(id)) CHECK(t.hypernyms(child, 1).contains(id));
      for (const auto& [parent, _] : t.hypernyms(id, 1)) {
        const auto& kids = t.hyponyms(parent);
        CHECK(std::ranges::find(kids, id) != kids.end());
      }
    }
    // Components partition the subset and no edge crosses components.
    SynsetIdSet subset;
    for (const auto& id : t.ids()) {
      if (std::uniform_int_distribution<>(0, 2)(rng) == 0) subset.insert(id);
    }
    auto comps = t.connected_components(subset);
    SynsetIdSet seen;
    std::map<std::string, std::size_t> comp_of;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      for (const auto& id : comps[c]) {
        CHECK(seen.insert(id).second);
        comp_of[id] = c;
      }
    }
    CHECK(seen == subset);
    for (const auto& id : subset) {
      for (const auto& h : t.at(id).hypernym_ids) {
        if (subset.contains(h)) CHECK(comp_of[id] == comp_of[h]);
      }
    }
  }
}
