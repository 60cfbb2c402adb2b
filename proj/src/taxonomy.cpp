#include "taxorank/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taxorank/errors.hpp"

namespace taxorank {

namespace {

constexpr std::string_view kNewPrefix = "new-";

const std::vector<std::string> kNoIds;

// Returns N for ids of the form "new-N", 0 otherwise.
std::uint64_t new_id_counter(std::string_view id) {
  if (!id.starts_with(kNewPrefix)) return 0;
  auto digits = id.substr(kNewPrefix.size());
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return 0;
  return value;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::string_view pos_tag(Pos pos) { return pos == Pos::noun ? "n" : "v"; }

Pos parse_pos(std::string_view tag) {
  if (tag == "n") return Pos::noun;
  if (tag == "v") return Pos::verb;
  throw ParseError("unsupported part of speech '" + std::string(tag) + "'");
}

std::string normalize_lemma(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
  }
  return out;
}

Taxonomy Taxonomy::from_synsets(std::vector<Synset> synsets) {
  Taxonomy t;
  if (synsets.empty()) throw ParseError("taxonomy has no synsets");
  t.pos_ = synsets.front().pos;
  for (auto& s : synsets) {
    if (s.id.empty()) throw ParseError("synset with empty id");
    if (s.pos != t.pos_) throw ParseError("synset " + s.id + " has a different part of speech");
    if (s.words.empty()) throw ParseError("synset " + s.id + " has no words");
    for (auto& w : s.words) {
      w = normalize_lemma(w);
      if (w.empty()) throw ParseError("synset " + s.id + " has an empty lemma");
    }
    std::string id = s.id;
    if (!t.synsets_.emplace(id, std::move(s)).second) {
      throw ParseError("duplicate synset id " + id);
    }
  }
  for (const auto& [id, s] : t.synsets_) {
    for (const auto& h : s.hypernym_ids) {
      if (!t.synsets_.contains(h)) {
        throw DanglingEdgeError("synset " + id + " lists unknown hypernym " + h);
      }
    }
  }
  t.rebuild_indexes();
  // topological_order() throws CycleError when the edge relation is cyclic.
  (void)t.topological_order();
  bool has_root = std::ranges::any_of(t.synsets_, [](const auto& kv) {
    return kv.second.hypernym_ids.empty();
  });
  if (!has_root) throw CycleError("taxonomy has no root synset");
  return t;
}

void Taxonomy::rebuild_indexes() {
  lemma_index_.clear();
  hyponyms_.clear();
  next_new_id_ = 1;
  for (const auto& [id, s] : synsets_) {
    for (const auto& w : s.words) {
      auto& ids = lemma_index_[w];
      if (ids.empty() || ids.back() != id) ids.push_back(id);
    }
    for (const auto& h : s.hypernym_ids) {
      auto& children = hyponyms_[h];
      if (children.empty() || children.back() != id) children.push_back(id);
    }
    next_new_id_ = std::max(next_new_id_, new_id_counter(id) + 1);
  }
  // Map iteration is by id, so every index list is already sorted.
}

std::size_t Taxonomy::edge_count() const {
  std::size_t n = 0;
  for (const auto& [_, s] : synsets_) n += s.hypernym_ids.size();
  return n;
}

bool Taxonomy::contains(std::string_view id) const { return synsets_.find(id) != synsets_.end(); }

void Taxonomy::require(std::string_view id) const {
  if (!contains(id)) throw UnknownSynsetError("unknown synset " + std::string(id));
}

const Synset& Taxonomy::at(std::string_view id) const {
  auto it = synsets_.find(id);
  if (it == synsets_.end()) throw UnknownSynsetError("unknown synset " + std::string(id));
  return it->second;
}

std::vector<std::string> Taxonomy::ids() const {
  std::vector<std::string> out;
  out.reserve(synsets_.size());
  for (const auto& [id, _] : synsets_) out.push_back(id);
  return out;
}

bool Taxonomy::has_lemma(std::string_view lemma) const {
  return lemma_index_.find(lemma) != lemma_index_.end();
}

std::span<const std::string> Taxonomy::synsets_of(std::string_view lemma) const {
  auto it = lemma_index_.find(lemma);
  if (it == lemma_index_.end()) return {};
  return it->second;
}

std::map<std::string, int> Taxonomy::hypernyms(std::string_view id, int max_order) const {
  require(id);
  if (max_order < 1) throw ConfigError("max_order must be at least 1");
  std::map<std::string, int> order;
  std::deque<std::pair<std::string_view, int>> queue{{id, 0}};
  while (!queue.empty()) {
    auto [cur, depth] = queue.front();
    queue.pop_front();
    if (depth == max_order) continue;
    for (const auto& h : at(cur).hypernym_ids) {
      if (h == id || order.contains(h)) continue;
      order.emplace(h, depth + 1);
      queue.emplace_back(h, depth + 1);
    }
  }
  return order;
}

const std::vector<std::string>& Taxonomy::hyponyms(std::string_view id) const {
  require(id);
  auto it = hyponyms_.find(id);
  return it == hyponyms_.end() ? kNoIds : it->second;
}

std::vector<SynsetIdSet> Taxonomy::connected_components(const SynsetIdSet& ids) const {
  std::vector<std::string_view> members(ids.begin(), ids.end());
  for (auto m : members) require(m);
  UnionFind uf(members.size());
  auto index_of = [&](std::string_view id) -> std::ptrdiff_t {
    auto it = std::lower_bound(members.begin(), members.end(), id);
    return (it != members.end() && *it == id) ? it - members.begin() : -1;
  };
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (const auto& h : at(members[i]).hypernym_ids) {
      auto j = index_of(h);
      if (j >= 0) uf.unite(i, static_cast<std::size_t>(j));
    }
  }
  // Roots are the smallest index of each component, so iterating in index
  // order yields components sorted by their smallest member.
  std::vector<SynsetIdSet> out;
  std::map<std::size_t, std::size_t> slot;
  for (std::size_t i = 0; i < members.size(); ++i) {
    auto root = uf.find(i);
    auto [it, inserted] = slot.emplace(root, out.size());
    if (inserted) out.emplace_back();
    out[it->second].emplace(members[i]);
  }
  return out;
}

std::vector<std::string> Taxonomy::topological_order() const {
  // Kahn's algorithm over child -> parent edges: roots come last.
  std::map<std::string_view, std::size_t> pending;
  for (const auto& [id, _] : synsets_) pending[id] = hyponyms(id).size();
  std::deque<std::string_view> ready;
  for (const auto& [id, n] : pending) {
    if (n == 0) ready.push_back(id);
  }
  std::vector<std::string> order;
  order.reserve(synsets_.size());
  while (!ready.empty()) {
    auto cur = ready.front();
    ready.pop_front();
    order.emplace_back(cur);
    for (const auto& h : at(cur).hypernym_ids) {
      if (--pending[h] == 0) ready.push_back(h);
    }
  }
  if (order.size() == synsets_.size()) return order;

  // Follow hypernym edges among the unresolved synsets until one repeats.
  std::string_view cur;
  for (const auto& [id, n] : pending) {
    if (n > 0) {
      cur = id;
      break;
    }
  }
  std::set<std::string_view> seen;
  while (seen.insert(cur).second) {
    for (const auto& h : at(cur).hypernym_ids) {
      if (pending[h] > 0) {
        cur = h;
        break;
      }
    }
  }
  throw CycleError("hypernym cycle through synset " + std::string(cur));
}

Taxonomy::Attached Taxonomy::attach(std::string_view lemma,
                                    std::span<const std::string> hypernym_ids) const {
  std::string word = normalize_lemma(lemma);
  if (word.empty()) throw ConfigError("cannot attach an empty lemma");
  if (hypernym_ids.empty()) throw ConfigError("attach needs at least one hypernym");
  for (const auto& h : hypernym_ids) require(h);

  Attached result{*this, {}};
  Taxonomy& t = result.taxonomy;
  std::uint64_t counter = next_new_id_;
  std::string id;
  do {
    id = std::string(kNewPrefix) + std::to_string(counter++);
  } while (t.contains(id));

  Synset s{id, pos_, {word}, {hypernym_ids.begin(), hypernym_ids.end()}};
  t.synsets_.emplace(id, std::move(s));
  t.rebuild_indexes();
  result.id = std::move(id);
  return result;
}

std::string synset_to_json_line(const Synset& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["pos"] = pos_tag(s.pos);
  j["words"] = s.words;
  j["hypernyms"] = s.hypernym_ids;
  return j.dump();
}

Taxonomy read_taxonomy(std::istream& in) {
  std::vector<Synset> synsets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Synset s;
      s.id = j.at("id").get<std::string>();
      s.pos = parse_pos(j.at("pos").get<std::string>());
      s.words = j.at("words").get<std::vector<std::string>>();
      s.hypernym_ids = j.at("hypernyms").get<std::vector<std::string>>();
      synsets.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return Taxonomy::from_synsets(std::move(synsets));
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open taxonomy file " + path.string());
  return read_taxonomy(in);
}

void write_taxonomy(std::ostream& out, const Taxonomy& taxonomy) {
  for (const auto& [_, s] : taxonomy.synsets()) out << synset_to_json_line(s) << '\n';
}

void save_taxonomy(const std::filesystem::path& path, const Taxonomy& taxonomy) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write taxonomy file " + path.string());
  write_taxonomy(out, taxonomy);
}

}  // namespace taxorank
