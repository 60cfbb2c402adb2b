#include "taxorank/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/Cholesky>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "json_matrix.hpp"
#include "taxorank/errors.hpp"

namespace taxorank {

// ---------------------------------------------------------------------------
// candidates

CandidateSet generate_candidates(std::string_view query, const Space& space, const Taxonomy& t,
                                 std::size_t k_assoc, const SynsetIdSet& mask) {
  CandidateSet cs;
  cs.query = normalize_lemma(query);
  cs.mask = mask;
  cs.query_vector = space.query_vector(cs.query, mask);
  auto associates = space.synsets().top_k(cs.query_vector, k_assoc, mask);

  std::map<std::string, std::vector<Provenance>> pool;
  auto add = [&](const std::string& id, const std::string& assoc, int level, double sim) {
    if (!mask.contains(id)) pool[id].push_back({assoc, level, sim});
  };
  for (const auto& a : associates) {
    if (!t.contains(a.id)) continue;
    add(a.id, a.id, 0, a.score);
    const auto& parents = t.at(a.id).hypernym_ids;
    std::set<std::string> level1(parents.begin(), parents.end());
    std::set<std::string> level2;
    for (const auto& p : level1) {
      for (const auto& g : t.at(p).hypernym_ids) level2.insert(g);
    }
    for (const auto& p : level1) add(p, a.id, 1, a.score);
    for (const auto& g : level2) add(g, a.id, 2, a.score);
  }
  cs.candidates.reserve(pool.size());
  for (auto& [id, prov] : pool) cs.candidates.push_back({id, std::move(prov)});
  return cs;
}

// ---------------------------------------------------------------------------
// wiktionary

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> lemma_list(std::string_view field) {
  std::vector<std::string> out;
  if (field.empty()) return out;
  for (const auto& part : split(field, '|')) {
    auto lemma = normalize_lemma(part);
    if (!lemma.empty()) out.push_back(std::move(lemma));
  }
  return out;
}

std::vector<std::string> tokens_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(normalize_lemma(text))};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

WiktionaryTable read_wiktionary(std::istream& in) {
  WiktionaryTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 4) {
      throw ParseError("wiktionary line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    WiktionaryRecord rec{normalize_lemma(fields[0]), lemma_list(fields[1]), lemma_list(fields[2]),
                         tokens_of(fields[3])};
    if (rec.word.empty()) throw ParseError("wiktionary line " + std::to_string(line_no) + ": empty word");
    auto word = rec.word;
    if (!table.emplace(word, std::move(rec)).second) {
      throw ParseError("wiktionary line " + std::to_string(line_no) + ": duplicate word '" + word + "'");
    }
  }
  return table;
}

WiktionaryTable load_wiktionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open wiktionary table " + path.string());
  return read_wiktionary(in);
}

// ---------------------------------------------------------------------------
// features

const std::vector<std::string>& feature_schema() {
  static const std::vector<std::string> schema = [] {
    std::vector<std::string> s{"n_sim",         "wikt_hypernym", "wikt_synonym",   "wikt_definition",
                               "wikt_hyp_sim",  "n",             "log2_2n",        "level_min",
                               "level_mean",    "level_max",     "lemma_sim_min",  "lemma_sim_mean",
                               "lemma_sim_max"};
    for (const char* inner : {"min", "mean", "max"}) {
      for (const char* outer : {"min", "mean", "max"}) s.push_back(fmt::format("hypo_{}_{}", inner, outer));
    }
    return s;
  }();
  return schema;
}

namespace {

struct Stats {
  double min = 0.0, mean = 0.0, max = 0.0;
};

Stats stats(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  Stats s{xs.front(), 0.0, xs.front()};
  for (double x : xs) {
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
    s.mean += x;
  }
  s.mean /= static_cast<double>(xs.size());
  return s;
}

bool contains_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  return std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end();
}

// Similarities of the query to each resolvable lemma of a synset.
std::vector<double> lemma_sims(const Synset& s, const CandidateSet& cs, const Space& space) {
  std::vector<double> out;
  for (const auto& w : s.words) {
    auto l = space.lemma_vector(w, cs.mask);
    if (!l.miss) out.push_back(space.similarity(cs.query_vector, l.vec));
  }
  return out;
}

}  // namespace

FeatureVector extract_features(const Candidate& c, const CandidateSet& cs, const Space& space, const Taxonomy& t,
                               const WiktionaryRecord* wikt) {
  FeatureVector f{};
  const auto& synset = t.at(c.id);
  const double n = static_cast<double>(c.n());
  const auto pos = space.synsets().position(c.id);
  Vector row = pos >= 0 ? Vector(space.synsets().rows().row(pos).transpose())
                        : Vector::Zero(static_cast<Eigen::Index>(space.synsets().dim()));
  f[0] = n * space.similarity(cs.query_vector, row);

  if (wikt != nullptr) {
    std::vector<std::string> lemmas;
    for (const auto& w : synset.words) lemmas.push_back(normalize_lemma(w));
    auto any_in = [&](const std::vector<std::string>& list) {
      return std::any_of(lemmas.begin(), lemmas.end(), [&](const std::string& l) {
        return std::find(list.begin(), list.end(), l) != list.end();
      });
    };
    f[1] = any_in(wikt->hypernyms) ? 1.0 : 0.0;
    f[2] = any_in(wikt->synonyms) ? 1.0 : 0.0;
    f[3] = std::any_of(lemmas.begin(), lemmas.end(),
                       [&](const std::string& l) { return contains_phrase(wikt->definition, tokens_of(l)); })
               ? 1.0
               : 0.0;
    std::vector<double> sims;
    for (const auto& h : wikt->hypernyms) {
      auto l = space.lemma_vector(h, cs.mask);
      if (!l.miss) sims.push_back(space.similarity(row, l.vec));
    }
    f[4] = stats(sims).mean;
  }

  f[5] = n;
  f[6] = std::log2(2.0 + n);
  std::vector<double> levels;
  for (const auto& p : c.provenance) levels.push_back(p.level);
  auto lv = stats(levels);
  f[7] = lv.min;
  f[8] = lv.mean;
  f[9] = lv.max;

  auto ls = stats(lemma_sims(synset, cs, space));
  f[10] = ls.min;
  f[11] = ls.mean;
  f[12] = ls.max;

  std::vector<double> mins, means, maxes;
  for (const auto& h : t.hyponyms(c.id)) {
    if (cs.mask.contains(h)) continue;
    auto sims = lemma_sims(t.at(h), cs, space);
    if (sims.empty()) continue;
    auto s = stats(sims);
    mins.push_back(s.min);
    means.push_back(s.mean);
    maxes.push_back(s.max);
  }
  std::size_t at = 13;
  for (const auto* v : {&mins, &means, &maxes}) {
    auto s = stats(*v);
    f[at++] = s.min;
    f[at++] = s.mean;
    f[at++] = s.max;
  }
  for (double x : f) {
    if (!std::isfinite(x)) throw NonFiniteLossError("non-finite feature for candidate " + c.id);
  }
  return f;
}

// ---------------------------------------------------------------------------
// training data

std::vector<std::string> leaf_lemmas(const Taxonomy& t) {
  std::vector<std::string> out;
  for (const auto& [lemma, ids] : t.lemma_index()) {
    bool leaf = std::all_of(ids.begin(), ids.end(), [&](const std::string& id) { return t.hyponyms(id).empty(); });
    if (leaf) out.push_back(lemma);
  }
  return out;
}

namespace {

struct PseudoQuery {
  bool kept = false;
  std::vector<FeatureVector> rows;
  std::vector<double> labels;
};

PseudoQuery process_pseudo_query(const std::string& lemma, const Taxonomy& t, const Space& space,
                                 const WiktionaryTable& wikt, std::size_t k_assoc) {
  PseudoQuery out;
  SynsetIdSet mask;
  SynsetIdSet gold;
  for (const auto& id : t.synsets_of(lemma)) {
    mask.insert(id);
    for (const auto& [h, order] : t.hypernyms(id, 2)) gold.insert(h);
  }
  CandidateSet cs;
  try {
    cs = generate_candidates(lemma, space, t, k_assoc, mask);
  } catch (const ZeroQueryError&) {
    return out;
  }
  auto w = wikt.find(lemma);
  const WiktionaryRecord* rec = w == wikt.end() ? nullptr : &w->second;
  bool positive = false;
  for (const auto& c : cs.candidates) {
    out.rows.push_back(extract_features(c, cs, space, t, rec));
    bool hit = gold.contains(c.id);
    positive = positive || hit;
    out.labels.push_back(hit ? 1.0 : 0.0);
  }
  out.kept = positive;
  return out;
}

}  // namespace

TrainingSet build_training_set(const Taxonomy& t, const Space& space, const WiktionaryTable& wikt,
                               const TrainingConfig& cfg) {
  if (cfg.n_pseudo == 0) throw ConfigError("n_pseudo must be positive");
  auto lemmas = leaf_lemmas(t);
  if (lemmas.empty()) throw InsufficientDataError("taxonomy has no leaf lemmas to train on");
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(lemmas.begin(), lemmas.end(), rng);
  lemmas.resize(std::min(lemmas.size(), cfg.n_pseudo));

  std::vector<PseudoQuery> results(lemmas.size());
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(lemmas.size())));
  {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < lemmas.size(); i += threads) {
            results[i] = process_pseudo_query(lemmas[i], t, space, wikt, cfg.k_assoc);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  TrainingSet ts;
  std::size_t rows = 0;
  for (const auto& r : results) rows += r.kept ? r.rows.size() : 0;
  if (rows == 0) throw InsufficientDataError("no pseudo-query produced a positive candidate");
  ts.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(kFeatureCount));
  ts.y.resize(static_cast<Eigen::Index>(rows));
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].kept) continue;
    for (std::size_t j = 0; j < results[i].rows.size(); ++j, ++at) {
      for (std::size_t c = 0; c < kFeatureCount; ++c) ts.x(at, static_cast<Eigen::Index>(c)) = results[i].rows[j][c];
      ts.y[at] = results[i].labels[j];
      ts.group.push_back(ts.queries.size());
    }
    ts.queries.push_back(lemmas[i]);
  }
  return ts;
}

// ---------------------------------------------------------------------------
// logistic regression

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

}  // namespace

double logistic_objective(const Matrix& x, const Vector& y, const Vector& w, double b, double lambda,
                          Vector* grad_w, double* grad_b) {
  Vector z = (x * w).array() + b;
  double loss = 0.5 * lambda * w.squaredNorm();
  Vector resid(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += softplus(z[i]) - y[i] * z[i];
    resid[i] = sigmoid(z[i]) - y[i];
  }
  if (grad_w != nullptr) *grad_w = x.transpose() * resid + lambda * w;
  if (grad_b != nullptr) *grad_b = resid.sum();
  return loss;
}

LogisticFit fit_logistic(const Matrix& x, const Vector& y, double lambda, double tol, int max_iterations) {
  const auto d = x.cols();
  LogisticFit fit;
  fit.w = Vector::Zero(d);
  // Start the bias at the class log-odds, clamped away from infinity.
  double prior = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
  fit.b = std::log(prior / (1.0 - prior));

  Vector gw;
  double gb = 0.0;
  double loss = logistic_objective(x, y, fit.w, fit.b, lambda, &gw, &gb);
  for (fit.iterations = 0; fit.iterations < max_iterations; ++fit.iterations) {
    fit.grad_norm = std::sqrt(gw.squaredNorm() + gb * gb);
    if (fit.grad_norm <= tol) break;
    Vector z = (x * fit.w).array() + fit.b;
    Vector s(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      double p = sigmoid(z[i]);
      s[i] = p * (1.0 - p);
    }
    Matrix h(d + 1, d + 1);
    h.topLeftCorner(d, d) = x.transpose() * s.asDiagonal() * x;
    h.topLeftCorner(d, d).diagonal().array() += lambda;
    Vector xs = x.transpose() * s;
    h.topRightCorner(d, 1) = xs;
    h.bottomLeftCorner(1, d) = xs.transpose();
    h(d, d) = s.sum();
    h.diagonal().array() += 1e-12;
    Vector g(d + 1);
    g << gw, gb;
    Vector step = h.ldlt().solve(g);
    if (!step.allFinite()) step = g;

    double t = 1.0;
    const double slope = g.dot(step);
    bool moved = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      Vector w_new = fit.w - t * step.head(d);
      double b_new = fit.b - t * step[d];
      Vector gw_new;
      double gb_new = 0.0;
      double loss_new = logistic_objective(x, y, w_new, b_new, lambda, &gw_new, &gb_new);
      if (loss_new <= loss - 1e-4 * t * slope) {
        fit.w = std::move(w_new);
        fit.b = b_new;
        gw = std::move(gw_new);
        gb = gb_new;
        loss = loss_new;
        moved = true;
        break;
      }
    }
    if (!moved) {
      fit.grad_norm = std::sqrt(gw.squaredNorm() + gb * gb);
      break;  // no further progress is representable
    }
  }
  if (!std::isfinite(loss)) throw NonFiniteLossError("logistic regression diverged");
  return fit;
}

namespace {

struct Scaling {
  Vector mean, std;
  std::vector<Eigen::Index> active;  // columns with nonzero variance
};

Scaling fit_scaling(const Matrix& x) {
  Scaling s;
  s.mean = x.colwise().mean().transpose();
  s.std = Vector::Ones(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    double var = (x.col(c).array() - s.mean[c]).square().mean();
    if (var > 0.0) {
      s.std[c] = std::sqrt(var);
      s.active.push_back(c);
    }
  }
  return s;
}

Matrix active_scaled(const Matrix& x, const Scaling& s) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(s.active.size()));
  for (std::size_t j = 0; j < s.active.size(); ++j) {
    auto c = s.active[j];
    out.col(static_cast<Eigen::Index>(j)) = (x.col(c).array() - s.mean[c]) / s.std[c];
  }
  return out;
}

Matrix select_rows(const Matrix& x, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

Vector select_rows(const Vector& y, const std::vector<Eigen::Index>& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[rows[i]];
  return out;
}

bool both_classes(const Vector& y) { return (y.array() > 0.5).any() && (y.array() < 0.5).any(); }

}  // namespace

double Ranker::score(const FeatureVector& f) const {
  double z = bias;
  for (std::size_t c = 0; c < f.size(); ++c) {
    auto i = static_cast<Eigen::Index>(c);
    z += weights[i] * (f[c] - mean[i]) / std[i];
  }
  return z;
}

Ranker train_ranker(const TrainingSet& data, const RankerConfig& cfg) {
  const auto n = data.x.rows();
  if (n == 0) throw EmptyDatasetError("no training rows");
  if (static_cast<std::size_t>(data.x.cols()) != kFeatureCount) throw SchemaMismatchError("training data width");
  if (!both_classes(data.y)) throw DegenerateDataError("training labels contain a single class");
  if (cfg.l2_grid.empty() || cfg.folds < 2) throw ConfigError("ranker: need an L2 grid and at least 2 folds");

  // Folds are assigned per group (pseudo-query) so a query never sits on
  // both sides of a split.
  std::vector<std::size_t> group = data.group;
  if (group.size() != static_cast<std::size_t>(n)) {
    group.resize(static_cast<std::size_t>(n));
    std::iota(group.begin(), group.end(), std::size_t{0});
  }
  std::vector<std::size_t> groups(group);
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(groups.begin(), groups.end(), rng);
  const std::size_t folds = std::min<std::size_t>(static_cast<std::size_t>(cfg.folds), groups.size());
  std::map<std::size_t, std::size_t> fold_of;
  for (std::size_t i = 0; i < groups.size(); ++i) fold_of[groups[i]] = i % folds;

  Ranker r;
  r.schema = feature_schema();
  r.l2 = cfg.l2_grid.front();
  if (folds >= 2) {
    std::vector<std::pair<Matrix, Vector>> train_sets, test_sets;
    std::vector<Scaling> scalings;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<Eigen::Index> tr, te;
      for (Eigen::Index i = 0; i < n; ++i) (fold_of[group[static_cast<std::size_t>(i)]] == f ? te : tr).push_back(i);
      Vector ytr = select_rows(data.y, tr);
      if (te.empty() || !both_classes(ytr)) continue;
      Matrix xtr = select_rows(data.x, tr);
      auto sc = fit_scaling(xtr);
      train_sets.emplace_back(active_scaled(xtr, sc), std::move(ytr));
      test_sets.emplace_back(active_scaled(select_rows(data.x, te), sc), select_rows(data.y, te));
      scalings.push_back(std::move(sc));
    }
    if (!train_sets.empty()) {
      double best = std::numeric_limits<double>::infinity();
      for (double l2 : cfg.l2_grid) {
        double total = 0.0;
        for (std::size_t f = 0; f < train_sets.size(); ++f) {
          auto fit = fit_logistic(train_sets[f].first, train_sets[f].second, l2, cfg.tol, cfg.max_iterations);
          const auto& [xte, yte] = test_sets[f];
          total += logistic_objective(xte, yte, fit.w, fit.b, 0.0) / static_cast<double>(xte.rows());
        }
        double mean_loss = total / static_cast<double>(train_sets.size());
        r.cv_loss[l2] = mean_loss;
        if (mean_loss < best) {
          best = mean_loss;
          r.l2 = l2;
        }
      }
    }
  }

  auto sc = fit_scaling(data.x);
  auto fit = fit_logistic(active_scaled(data.x, sc), data.y, r.l2, cfg.tol, cfg.max_iterations);
  r.mean = sc.mean;
  r.std = sc.std;
  r.weights = Vector::Zero(static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t j = 0; j < sc.active.size(); ++j) r.weights[sc.active[j]] = fit.w[static_cast<Eigen::Index>(j)];
  r.bias = fit.b;
  return r;
}

// ---------------------------------------------------------------------------
// ranking

std::vector<ScoredId> rank(const Ranker& r, const CandidateSet& cs, const std::vector<FeatureVector>& features,
                           std::size_t k) {
  if (r.schema != feature_schema() || static_cast<std::size_t>(r.weights.size()) != kFeatureCount ||
      static_cast<std::size_t>(r.mean.size()) != kFeatureCount ||
      static_cast<std::size_t>(r.std.size()) != kFeatureCount) {
    throw SchemaMismatchError("ranker was trained with a different feature schema");
  }
  if (features.size() != cs.candidates.size()) {
    throw SchemaMismatchError("feature rows do not match the candidate set");
  }
  std::vector<ScoredId> out;
  out.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) out.push_back({cs.candidates[i].id, r.score(features[i])});
  std::sort(out.begin(), out.end(), [](const ScoredId& a, const ScoredId& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<ScoredId> predict(std::string_view word, const Space& space, const Taxonomy& t, const Ranker& r,
                              const WiktionaryTable& wikt, std::size_t k, std::size_t k_assoc) {
  auto cs = generate_candidates(word, space, t, k_assoc);
  auto it = wikt.find(cs.query);
  const WiktionaryRecord* rec = it == wikt.end() ? nullptr : &it->second;
  std::vector<FeatureVector> features;
  features.reserve(cs.candidates.size());
  for (const auto& c : cs.candidates) features.push_back(extract_features(c, cs, space, t, rec));
  return rank(r, cs, features, k);
}

// ---------------------------------------------------------------------------
// persistence

void save_ranker(const std::filesystem::path& path, const Ranker& r) {
  nlohmann::ordered_json j;
  j["format"] = "taxorank-ranker/1";
  j["schema"] = r.schema;
  j["weights"] = detail::vector_to_json(r.weights);
  j["bias"] = r.bias;
  j["mean"] = detail::vector_to_json(r.mean);
  j["std"] = detail::vector_to_json(r.std);
  j["l2"] = r.l2;
  auto cv = nlohmann::ordered_json::array();
  for (const auto& [l2, loss] : r.cv_loss) cv.push_back({{"l2", l2}, {"log_loss", loss}});
  j["cv"] = std::move(cv);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write ranker " + path.string());
  out << j.dump(2) << '\n';
}

Ranker load_ranker(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ranker " + path.string());
  try {
    auto j = nlohmann::json::parse(in);
    if (j.at("format") != "taxorank-ranker/1") throw ParseError("unsupported ranker format");
    Ranker r;
    r.schema = j.at("schema").get<std::vector<std::string>>();
    r.weights = detail::vector_from_json(j.at("weights"));
    r.bias = j.at("bias").get<double>();
    r.mean = detail::vector_from_json(j.at("mean"));
    r.std = detail::vector_from_json(j.at("std"));
    r.l2 = j.at("l2").get<double>();
    for (const auto& e : j.at("cv")) r.cv_loss[e.at("l2").get<double>()] = e.at("log_loss").get<double>();
    if (r.weights.size() != r.mean.size() || r.weights.size() != r.std.size() ||
        static_cast<std::size_t>(r.weights.size()) != r.schema.size()) {
      throw SchemaMismatchError("ranker file has inconsistent lengths");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ranker: ") + e.what());
  }
}

void write_predictions(std::ostream& out, std::string_view word, const std::vector<ScoredId>& ranked) {
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    out << fmt::format("{}\t{}\t{}\t{}\n", word, i + 1, ranked[i].id, ranked[i].score);
  }
}

std::vector<PredictionRow> read_predictions(std::istream& in) {
  std::vector<PredictionRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 4) throw ParseError("predictions line " + std::to_string(line_no) + ": expected 4 fields");
    try {
      std::size_t used = 0;
      PredictionRow row{normalize_lemma(f[0]), std::stoul(f[1], &used), f[2], 0.0};
      if (used != f[1].size() || row.rank == 0) throw std::invalid_argument("rank");
      row.score = std::stod(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument("score");
      rows.push_back(std::move(row));
    } catch (const std::logic_error&) {
      throw ParseError("predictions line " + std::to_string(line_no) + ": malformed rank or score");
    }
  }
  return rows;
}

}  // namespace taxorank
