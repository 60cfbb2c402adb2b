#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace taxorank {

enum class Pos { noun, verb };

std::string_view pos_tag(Pos pos);
Pos parse_pos(std::string_view tag);

/// Lowercases ASCII letters, trims, and collapses internal whitespace runs to
/// a single space.
std::string normalize_lemma(std::string_view raw);

struct Synset {
  std::string id;
  Pos pos = Pos::noun;
  std::vector<std::string> words;
  std::vector<std::string> hypernym_ids;

  bool operator==(const Synset&) const = default;
};

using SynsetIdSet = std::set<std::string>;

/// Immutable hypernymy DAG. Edges are stored child -> parent. Every emitted
/// collection of ids is sorted so outputs are reproducible.
class Taxonomy {
 public:
  Taxonomy() = default;

  /// Validates the synsets (dangling edges, cycles, roots, lemma shape) and
  /// builds the lemma and hyponym indexes.
  static Taxonomy from_synsets(std::vector<Synset> synsets);

  Pos pos() const { return pos_; }
  std::size_t size() const { return synsets_.size(); }
  std::size_t edge_count() const;
  bool contains(std::string_view id) const;
  const Synset& at(std::string_view id) const;
  const std::map<std::string, Synset, std::less<>>& synsets() const { return synsets_; }
  std::vector<std::string> ids() const;

  bool has_lemma(std::string_view lemma) const;
  /// Synsets whose word list contains the lemma (sorted; empty when absent).
  std::span<const std::string> synsets_of(std::string_view lemma) const;
  const std::map<std::string, std::vector<std::string>, std::less<>>& lemma_index() const {
    return lemma_index_;
  }

  /// Breadth-first walk up the hypernym edges. Each reached synset maps to the
  /// smallest number of hops needed to reach it; the query itself is excluded.
  std::map<std::string, int> hypernyms(std::string_view id, int max_order) const;

  /// Direct children of the synset, sorted by id.
  const std::vector<std::string>& hyponyms(std::string_view id) const;

  /// Components of the subgraph induced on `ids`, with edges taken as
  /// undirected. Components are sorted by their smallest member.
  std::vector<SynsetIdSet> connected_components(const SynsetIdSet& ids) const;

  std::vector<std::string> topological_order() const;

  struct Attached;
  /// Adds a single-lemma synset under the given parents. Returns a new value;
  /// this taxonomy is left untouched.
  Attached attach(std::string_view lemma, std::span<const std::string> hypernym_ids) const;

  bool operator==(const Taxonomy& other) const { return synsets_ == other.synsets_; }

 private:
  void rebuild_indexes();
  void require(std::string_view id) const;

  Pos pos_ = Pos::noun;
  std::map<std::string, Synset, std::less<>> synsets_;
  std::map<std::string, std::vector<std::string>, std::less<>> lemma_index_;
  std::map<std::string, std::vector<std::string>, std::less<>> hyponyms_;
  std::uint64_t next_new_id_ = 1;
};

struct Taxonomy::Attached {
  Taxonomy taxonomy;
  std::string id;
};

Taxonomy read_taxonomy(std::istream& in);
Taxonomy load_taxonomy(const std::filesystem::path& path);
/// JSON Lines, one synset per line, lines sorted by id.
void write_taxonomy(std::ostream& out, const Taxonomy& taxonomy);
void save_taxonomy(const std::filesystem::path& path, const Taxonomy& taxonomy);
std::string synset_to_json_line(const Synset& synset);

}  // namespace taxorank
