#include "taxorank/vectors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "taxorank/errors.hpp"

namespace taxorank {

namespace {

bool parse_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

constexpr char kCacheMagic[8] = {'T', 'X', 'R', 'K', 'I', 'D', 'X', '1'};

}  // namespace

bool VectorStore::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

bool VectorStore::add(std::string token, Vector vec) {
  if (static_cast<std::size_t>(vec.size()) != dim_) {
    throw DimensionMismatchError("vector for '" + token + "' has " + std::to_string(vec.size()) +
                                 " components, expected " + std::to_string(dim_));
  }
  if (index_.contains(token)) return false;
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  rows_.push_back(std::move(vec));
  normalized_ = false;
  return true;
}

const Vector* VectorStore::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? nullptr : &rows_[it->second];
}

void VectorStore::normalize_rows() {
  for (auto& r : rows_) {
    double n = r.norm();
    if (n > 0) r /= n;
  }
  normalized_ = true;
}

Lookup VectorStore::word_vector(std::string_view token) const {
  if (const auto* v = find(token)) return {*v, false};
  // Only one string of each length can be a prefix of the token, so the
  // longest matching prefix is found by shrinking from the right.
  for (std::size_t len = token.size(); len-- > 1;) {
    if (const auto* v = find(token.substr(0, len))) return {*v, false};
  }
  return {Vector::Zero(static_cast<Eigen::Index>(dim_)), true};
}

Lookup VectorStore::phrase_vector(std::string_view phrase) const {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(dim_));
  std::size_t used = 0;
  for (auto tok : split_ws(phrase)) {
    auto lookup = word_vector(tok);
    double n = lookup.vec.norm();
    if (n > 0) {
      sum += lookup.vec / n;
      ++used;
    }
  }
  if (used == 0) return {std::move(sum), true};
  return {sum / static_cast<double>(used), false};
}

Lookup VectorStore::synset_vector(const Synset& synset) const {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(dim_));
  bool any_hit = false;
  for (const auto& w : synset.words) {
    auto lookup = phrase_vector(w);
    any_hit = any_hit || !lookup.miss;
    sum += lookup.vec;
  }
  if (!synset.words.empty()) sum /= static_cast<double>(synset.words.size());
  return {std::move(sum), !any_hit};
}

VectorStore read_vectors(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!split_ws(line).empty()) break;
  }
  auto header = split_ws(line);
  if (header.size() != 2) throw ParseError("vector file: missing 'count dim' header");
  double count_d = 0, dim_d = 0;
  if (!parse_double(header[0], count_d) || !parse_double(header[1], dim_d) || count_d < 0 ||
      dim_d < 1 || count_d != std::floor(count_d) || dim_d != std::floor(dim_d)) {
    throw ParseError("vector file: malformed header '" + line + "'");
  }
  const auto count = static_cast<std::size_t>(count_d);
  const auto dim = static_cast<std::size_t>(dim_d);
  VectorStore store(dim);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() - 1 != dim) {
      throw DimensionMismatchError("vector file line " + std::to_string(line_no) + ": " +
                                   std::to_string(fields.size() - 1) + " values, expected " +
                                   std::to_string(dim));
    }
    Vector v(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      double x = 0;
      if (!parse_double(fields[i + 1], x) || !std::isfinite(x)) {
        throw ParseError("vector file line " + std::to_string(line_no) + ": bad number '" +
                         std::string(fields[i + 1]) + "'");
      }
      v[static_cast<Eigen::Index>(i)] = x;
    }
    store.add(std::string(fields[0]), std::move(v));
    ++rows;
  }
  if (rows != count) {
    throw ParseError("vector file declares " + std::to_string(count) + " rows but has " +
                     std::to_string(rows));
  }
  return store;
}

VectorStore load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vector file " + path.string());
  return read_vectors(in);
}

void write_vectors(std::ostream& out, const std::vector<std::string>& tokens, const Matrix& rows) {
  out << tokens.size() << ' ' << rows.cols() << '\n';
  fmt::memory_buffer buf;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{}", tokens[i]);
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      fmt::format_to(std::back_inserter(buf), " {}", rows(static_cast<Eigen::Index>(i), j));
    }
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

SynsetIndex::SynsetIndex(std::vector<std::string> ids, Matrix rows, Geometry geometry)
    : ids_(std::move(ids)), rows_(std::move(rows)), geometry_(geometry) {
  if (static_cast<Eigen::Index>(ids_.size()) != rows_.rows()) {
    throw DimensionMismatchError("synset index: id count differs from row count");
  }
  if (!std::ranges::is_sorted(ids_)) {
    std::vector<std::size_t> perm(ids_.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::ranges::sort(perm, {}, [&](std::size_t i) -> const std::string& { return ids_[i]; });
    Matrix sorted(rows_.rows(), rows_.cols());
    std::vector<std::string> sorted_ids;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      sorted.row(static_cast<Eigen::Index>(i)) = rows_.row(static_cast<Eigen::Index>(perm[i]));
      sorted_ids.push_back(ids_[perm[i]]);
    }
    ids_ = std::move(sorted_ids);
    rows_ = std::move(sorted);
  }
}

SynsetIndex SynsetIndex::build(const VectorStore& store, const Taxonomy& taxonomy) {
  auto ids = taxonomy.ids();
  Matrix rows(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(store.dim()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = store.synset_vector(taxonomy.at(ids[i])).vec;
  }
  return SynsetIndex(std::move(ids), std::move(rows));
}

std::ptrdiff_t SynsetIndex::position(std::string_view id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  return (it != ids_.end() && *it == id) ? it - ids_.begin() : -1;
}

Vector SynsetIndex::row(std::string_view id) const {
  auto p = position(id);
  if (p < 0) throw UnknownSynsetError("synset " + std::string(id) + " is not indexed");
  return rows_.row(p).transpose();
}

void SynsetIndex::upsert(const std::string& id, const Vector& vec) {
  if (vec.size() != rows_.cols()) throw DimensionMismatchError("synset index: wrong row size");
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  auto pos = static_cast<Eigen::Index>(it - ids_.begin());
  if (it != ids_.end() && *it == id) {
    rows_.row(pos) = vec.transpose();
    return;
  }
  Matrix grown(rows_.rows() + 1, rows_.cols());
  grown.topRows(pos) = rows_.topRows(pos);
  grown.row(pos) = vec.transpose();
  grown.bottomRows(rows_.rows() - pos) = rows_.bottomRows(rows_.rows() - pos);
  rows_ = std::move(grown);
  ids_.insert(it, id);
}

std::vector<ScoredId> SynsetIndex::top_k(const Vector& query, std::size_t k,
                                         const std::set<std::string>& exclude) const {
  if (query.size() != rows_.cols()) throw DimensionMismatchError("query has the wrong dimension");
  if (k == 0) throw ConfigError("k must be positive");
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(ids_.size());
  if (geometry_ == Geometry::euclidean) {
    double qn = query.norm();
    if (qn == 0.0) throw ZeroQueryError("query vector has zero norm");
    Vector sims = rows_ * (query / qn);
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (exclude.contains(ids_[i])) continue;
      double rn = rows_.row(static_cast<Eigen::Index>(i)).norm();
      double s = rn == 0.0 ? -std::numeric_limits<double>::infinity()
                           : sims[static_cast<Eigen::Index>(i)] / rn;
      scored.emplace_back(s, i);
    }
  } else {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (exclude.contains(ids_[i])) continue;
      scored.emplace_back(-poincare_distance(query, rows_.row(static_cast<Eigen::Index>(i)).transpose()), i);
    }
  }
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    better);
  std::vector<ScoredId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({ids_[scored[i].second], scored[i].first});
  return out;
}

void save_index_cache(const std::filesystem::path& path, const SynsetIndex& index) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write index cache " + path.string());
  auto put = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  out.write(kCacheMagic, sizeof kCacheMagic);
  put(index.geometry() == Geometry::euclidean ? 0 : 1);
  put(index.size());
  put(index.dim());
  for (const auto& id : index.ids()) {
    put(id.size());
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = index.rows();
  out.write(reinterpret_cast<const char*>(rm.data()),
            static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

SynsetIndex load_index_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open index cache " + path.string());
  char magic[sizeof kCacheMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCacheMagic, sizeof magic) != 0) {
    throw ParseError("index cache has an unknown header");
  }
  auto get = [&]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw ParseError("index cache truncated");
    return v;
  };
  auto geometry = get() == 0 ? Geometry::euclidean : Geometry::poincare;
  auto n = get();
  auto dim = get();
  std::vector<std::string> ids(n);
  for (auto& id : ids) {
    id.resize(get());
    in.read(id.data(), static_cast<std::streamsize>(id.size()));
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
      static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  if (!in) throw ParseError("index cache truncated");
  return SynsetIndex(std::move(ids), Matrix(rm), geometry);
}

}  // namespace taxorank
