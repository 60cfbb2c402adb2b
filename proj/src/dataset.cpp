#include "taxorank/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "taxorank/errors.hpp"

namespace taxorank {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(
      std::ranges::count_if(s, [](unsigned char c) { return (c & 0xC0) != 0x80; }));
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

IdMapping IdMapping::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mapping file " + path.string());
  return read(in);
}

IdMapping IdMapping::read(std::istream& in) {
  IdMapping m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto parts = split(line, '\t');
    if (parts.size() != 2 || parts[0].empty() || parts[1].empty()) {
      throw ParseError("mapping line " + std::to_string(line_no) + ": expected old_id TAB new_id");
    }
    m.add(parts[0], parts[1]);
  }
  return m;
}

void IdMapping::add(std::string old_id, std::string new_id) {
  new_to_old_.insert_or_assign(std::move(new_id), std::move(old_id));
}

std::string IdMapping::to_old(const std::string& new_id) const {
  auto it = new_to_old_.find(new_id);
  return it == new_to_old_.end() ? new_id : it->second;
}

QueryDataset diff_versions(const Taxonomy& old_t, const Taxonomy& new_t,
                           const FilterConfig& filters, const IdMapping& mapping) {
  if (old_t.pos() != new_t.pos()) {
    throw PosMismatchError("taxonomies have different parts of speech");
  }
  QueryDataset ds;
  ds.pos = old_t.pos();

  for (const auto& [lemma, new_ids] : new_t.lemma_index()) {
    if (old_t.has_lemma(lemma)) continue;
    SynsetIdSet gold;
    bool resolvable = true;
    for (const auto& sid : new_ids) {
      for (const auto& [hyper, order] : new_t.hypernyms(sid, 2)) {
        std::string old_id = mapping.to_old(hyper);
        bool in_old = old_t.contains(old_id);
        if (order == 1 && !in_old) {
          resolvable = false;
          break;
        }
        if (in_old) gold.insert(std::move(old_id));
      }
      if (!resolvable) break;
    }
    // A lemma whose new synsets have no hypernyms at all (new roots) has
    // nothing to attach to.
    if (resolvable && !gold.empty()) ds.entries.push_back({lemma, std::move(gold)});
  }

  ds.entries = apply_filters(std::move(ds.entries), filters, old_t);
  if (ds.entries.empty()) throw EmptyDatasetError("no query words survive the diff and filters");
  return ds;
}

std::vector<QueryEntry> apply_filters(std::vector<QueryEntry> entries, const FilterConfig& filters,
                                      const Taxonomy& old_t) {
  auto drop = [&](const QueryEntry& e) {
    if (filters.min_length > 0 && utf8_length(e.word) < filters.min_length) return true;
    if (filters.multiword && e.word.find_first_of(" \t") != std::string::npos) return true;
    if (filters.substring_of_hypernym) {
      for (const auto& gid : e.gold_ids) {
        if (!old_t.contains(gid)) continue;
        for (const auto& lemma : old_t.at(gid).words) {
          if (e.word.find(lemma) != std::string::npos) return true;
        }
      }
    }
    return false;
  };
  std::erase_if(entries, drop);
  return entries;
}

void write_dataset(std::ostream& out, const QueryDataset& dataset) {
  for (const auto& e : dataset.entries) {
    out << e.word << '\t';
    bool first = true;
    for (const auto& g : e.gold_ids) {
      if (!first) out << ',';
      out << g;
      first = false;
    }
    out << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const QueryDataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write dataset file " + path.string());
  write_dataset(out, dataset);
}

std::vector<QueryEntry> read_dataset(std::istream& in) {
  std::vector<QueryEntry> entries;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    QueryEntry e;
    e.word = normalize_lemma(line.substr(0, tab));
    if (e.word.empty()) throw ParseError("dataset line " + std::to_string(line_no) + ": empty word");
    if (tab != std::string::npos) {
      for (auto& id : split(line.substr(tab + 1), ',')) {
        if (!id.empty()) e.gold_ids.insert(id);
      }
    }
    if (!seen.insert(e.word).second) {
      throw ParseError("dataset line " + std::to_string(line_no) + ": duplicate word " + e.word);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<QueryEntry> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file " + path.string());
  return read_dataset(in);
}

}  // namespace taxorank
