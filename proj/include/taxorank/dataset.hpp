#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taxorank/taxonomy.hpp"

namespace taxorank {

struct QueryEntry {
  std::string word;
  SynsetIdSet gold_ids;  // ids in the old taxonomy

  bool operator==(const QueryEntry&) const = default;
};

struct QueryDataset {
  Pos pos = Pos::noun;
  std::vector<QueryEntry> entries;  // sorted by word
  std::string old_label;
  std::string new_label;
};

struct FilterConfig {
  std::size_t min_length = 0;  // in code points; 0 disables the filter
  bool substring_of_hypernym = false;
  bool multiword = false;
};

/// Optional translation of new-version ids into the old id space
/// (TSV: old_id TAB new_id). Ids without a mapping are taken verbatim.
class IdMapping {
 public:
  IdMapping() = default;
  static IdMapping load(const std::filesystem::path& path);
  static IdMapping read(std::istream& in);

  void add(std::string old_id, std::string new_id);
  /// Old-space id for a new-version id.
  std::string to_old(const std::string& new_id) const;
  bool empty() const { return new_to_old_.empty(); }

 private:
  std::map<std::string, std::string, std::less<>> new_to_old_;
};

/// Builds the query/gold set from two releases: lemmas present only in the
/// newer one whose direct hypernyms all exist in the older one. Gold is the
/// direct hypernyms plus the grandparents that also exist in the old version.
QueryDataset diff_versions(const Taxonomy& old_taxonomy, const Taxonomy& new_taxonomy,
                           const FilterConfig& filters, const IdMapping& mapping = {});

std::vector<QueryEntry> apply_filters(std::vector<QueryEntry> entries, const FilterConfig& filters,
                                      const Taxonomy& old_taxonomy);

/// word TAB comma-separated gold ids, one entry per line.
void write_dataset(std::ostream& out, const QueryDataset& dataset);
void save_dataset(const std::filesystem::path& path, const QueryDataset& dataset);
std::vector<QueryEntry> read_dataset(std::istream& in);
std::vector<QueryEntry> load_dataset(const std::filesystem::path& path);

}  // namespace taxorank
