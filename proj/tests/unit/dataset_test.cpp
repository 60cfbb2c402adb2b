#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "taxorank/dataset.hpp"
#include "taxorank/errors.hpp"

using namespace taxorank;
using namespace taxorank::testing;

namespace {

Taxonomy with_extra(std::vector<Synset> extra) {
  std::vector<Synset> all;
  auto base = t0();
  for (const auto& [_, s] : base.synsets()) all.push_back(s);
  for (auto& s : extra) all.push_back(std::move(s));
  return Taxonomy::from_synsets(std::move(all));
}

}  // namespace

TEST_CASE("diff picks up a new lemma with parent and grandparent") {
  auto new_t = with_extra({syn("s7", {"puppy"}, {"s3"})});
  auto ds = diff_versions(t0(), new_t, {});
  REQUIRE(ds.entries.size() == 1);
  CHECK(ds.entries[0] == QueryEntry{"puppy", {"s3", "s2"}});
}

TEST_CASE("words whose hypernym is missing from the old version are excluded") {
  auto new_t = with_extra({syn("s7", {"puppy"}, {"s3"}), syn("s9", {"gadget"}, {"s1"}),
                           syn("s8", {"widget"}, {"s9"})});
  auto ds = diff_versions(t0(), new_t, {});
  std::vector<std::string> words;
  for (const auto& e : ds.entries) words.push_back(e.word);
  // "gadget" hangs off s1 which exists in old, so it survives; "widget" does not.
  CHECK(words == std::vector<std::string>{"gadget", "puppy"});
}

TEST_CASE("grandparents missing from old are omitted, not fatal") {
  // The new version inserts g between p and r; g is unknown to the old one.
  auto old_t = Taxonomy::from_synsets({syn("r", {"root"}), syn("p", {"parent"}, {"r"})});
  auto new_t = Taxonomy::from_synsets({syn("r", {"root"}), syn("g", {"grand"}, {"r"}),
                                       syn("p", {"parent"}, {"g"}), syn("q", {"query"}, {"p"})});
  auto ds = diff_versions(old_t, new_t, {});
  std::vector<std::string> words;
  for (const auto& e : ds.entries) words.push_back(e.word);
  REQUIRE(words == std::vector<std::string>{"grand", "query"});
  CHECK(ds.entries[1].gold_ids == SynsetIdSet{"p"});
}

TEST_CASE("self diff is empty") {
  CHECK_THROWS_AS(diff_versions(t0(), t0(), {}), EmptyDatasetError);
}

TEST_CASE("pos mismatch") {
  auto verbs = Taxonomy::from_synsets({Synset{"v1", Pos::verb, {"run"}, {}}});
  CHECK_THROWS_AS(diff_versions(t0(), verbs, {}), PosMismatchError);
}

TEST_CASE("polysemous lemma unions gold over its senses") {
  auto new_t = with_extra({syn("s7", {"bark"}, {"s3"}), syn("s8", {"bark"}, {"s6"})});
  auto ds = diff_versions(t0(), new_t, {});
  REQUIRE(ds.entries.size() == 1);
  CHECK(ds.entries[0].gold_ids == SynsetIdSet{"s2", "s3", "s5", "s6"});
}

TEST_CASE("unrelated synset without new lemmas changes nothing") {
  auto a = diff_versions(t0(), with_extra({syn("s7", {"puppy"}, {"s3"})}), {});
  auto b = diff_versions(
      t0(), with_extra({syn("s7", {"puppy"}, {"s3"}), syn("s8", {"dog", "cat"}, {"s1"})}), {});
  CHECK(a.entries == b.entries);
}

TEST_CASE("id mapping translates new ids into the old space") {
  auto old_t = Taxonomy::from_synsets({syn("old-r", {"root"}), syn("old-p", {"parent"}, {"old-r"})});
  auto new_t = Taxonomy::from_synsets(
      {syn("new-r", {"root"}), syn("new-p", {"parent"}, {"new-r"}), syn("new-q", {"query"}, {"new-p"})});
  std::istringstream tsv("old-r\tnew-r\nold-p\tnew-p\n");
  auto ds = diff_versions(old_t, new_t, {}, IdMapping::read(tsv));
  REQUIRE(ds.entries.size() == 1);
  CHECK(ds.entries[0].gold_ids == SynsetIdSet{"old-p", "old-r"});
}

TEST_CASE("filters") {
  auto t = t0();
  std::vector<QueryEntry> entries{{"cat", {"s2"}}, {"puppy", {"s3"}}};
  FilterConfig min_len;
  min_len.min_length = 4;
  auto kept = apply_filters(entries, min_len, t);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].word == "puppy");

  auto cart = Taxonomy::from_synsets({syn("r", {"vehicle"}), syn("c", {"cart"}, {"r"})});
  FilterConfig sub;
  sub.substring_of_hypernym = true;
  CHECK(apply_filters({{"dogcart", {"c", "r"}}}, sub, cart).empty());
  CHECK(apply_filters({{"wagon", {"c", "r"}}}, sub, cart).size() == 1);

  FilterConfig multi;
  multi.multiword = true;
  CHECK(apply_filters({{"hot dog", {"s3"}}, {"puppy", {"s3"}}}, multi, t).size() == 1);

  CHECK(apply_filters(entries, {}, t) == entries);
}

TEST_CASE("dataset TSV round trip") {
  QueryDataset ds;
  ds.entries = {{"puppy", {"s3", "s2"}}, {"sapling", {"s6"}}};
  std::ostringstream out;
  write_dataset(out, ds);
  CHECK(out.str() == "puppy\ts2,s3\nsapling\ts6\n");
  std::istringstream in(out.str());
  CHECK(read_dataset(in) == ds.entries);
}
