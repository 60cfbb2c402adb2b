#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "../json_matrix.hpp"
#include "taxorank/errors.hpp"
#include "taxorank/graph_embeddings.hpp"

namespace taxorank {

void GcnConfig::validate() const {
  if (hidden <= 0 || out <= 0 || steps <= 0) throw ConfigError("gcn: sizes must be positive");
  if (!(step_size > 0) || !(negative_ratio > 0)) {
    throw ConfigError("gcn: step size and negative ratio must be positive");
  }
}

Vector GcnModel::embed_isolated(const Vector& features) const {
  if (features.size() != w0.rows()) throw DimensionMismatchError("gcn: feature size mismatch");
  // A lone node with a self loop has normalised weight 1.
  Vector hidden = (w0.transpose() * features).cwiseMax(0.0);
  return w1.transpose() * hidden;
}

SparseMatrix gcn_normalized_adjacency(const Taxonomy& t) {
  auto adj = undirected_adjacency(t);
  const auto n = static_cast<Eigen::Index>(adj.size());
  Vector inv_sqrt_deg(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(adj[static_cast<std::size_t>(i)].size() + 1));
  }
  std::vector<Eigen::Triplet<double>> entries;
  for (Eigen::Index i = 0; i < n; ++i) {
    entries.emplace_back(static_cast<int>(i), static_cast<int>(i), inv_sqrt_deg[i] * inv_sqrt_deg[i]);
    for (auto j : adj[static_cast<std::size_t>(i)]) {
      auto jj = static_cast<Eigen::Index>(j);
      entries.emplace_back(static_cast<int>(i), static_cast<int>(jj), inv_sqrt_deg[i] * inv_sqrt_deg[jj]);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

Matrix gcn_forward(const SparseMatrix& adj, const Matrix& x, const GcnModel& model) {
  Matrix hidden = (adj * (x * model.w0)).cwiseMax(0.0);
  return adj * (hidden * model.w1);
}

namespace {

double softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }
double sigmoid(double s) { return s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s)); }

}  // namespace

GcnLossGrad gcn_loss_and_grad(const SparseMatrix& adj, const Matrix& x, const GcnModel& model,
                              const std::vector<LabeledPair>& pairs) {
  Matrix ax = adj * x;
  Matrix pre = ax * model.w0;
  Matrix hidden = pre.cwiseMax(0.0);
  Matrix a_hidden = adj * hidden;
  Matrix z = a_hidden * model.w1;

  GcnLossGrad out;
  Matrix grad_z = Matrix::Zero(z.rows(), z.cols());
  const double denom = std::max<std::size_t>(pairs.size(), 1);
  for (const auto& [a, b, label] : pairs) {
    auto ia = static_cast<Eigen::Index>(a);
    auto ib = static_cast<Eigen::Index>(b);
    double s = z.row(ia).dot(z.row(ib));
    out.loss += (softplus(s) - label * s) / denom;
    double g = (sigmoid(s) - label) / denom;
    grad_z.row(ia) += g * z.row(ib);
    grad_z.row(ib) += g * z.row(ia);
  }
  if (!std::isfinite(out.loss)) throw NonFiniteLossError("gcn: loss is not finite");
  out.grad_w1 = a_hidden.transpose() * grad_z;
  // The normalised adjacency is symmetric, so A^T = A.
  Matrix grad_hidden = adj * (grad_z * model.w1.transpose());
  Matrix grad_pre = grad_hidden.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  out.grad_w0 = ax.transpose() * grad_pre;
  return out;
}

GcnResult train_gcn(const Taxonomy& t, const SynsetIndex& features, const GcnConfig& cfg) {
  cfg.validate();
  auto ids = t.ids();
  const std::size_t n = ids.size();
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(features.dim()));
  for (std::size_t i = 0; i < n; ++i) {
    auto p = features.position(ids[i]);
    if (p < 0) throw ConfigError("gcn: no features for synset " + ids[i]);
    x.row(static_cast<Eigen::Index>(i)) = features.rows().row(p);
  }
  const SparseMatrix adj = gcn_normalized_adjacency(t);

  std::vector<LabeledPair> positives;
  std::set<std::pair<std::size_t, std::size_t>> linked;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& h : t.at(ids[i]).hypernym_ids) {
      auto j = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), h) - ids.begin());
      positives.push_back({i, j, 1.0});
      linked.emplace(std::min(i, j), std::max(i, j));
    }
  }
  std::size_t negatives = 0;
  if (n >= 2) {
    negatives = positives.empty()
                    ? n
                    : std::max<std::size_t>(1, static_cast<std::size_t>(
                                                   std::lround(cfg.negative_ratio * positives.size())));
  }

  std::mt19937_64 rng(cfg.seed);
  GcnResult result;
  auto glorot = [&](Eigen::Index rows, Eigen::Index cols) {
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  };
  result.model.w0 = glorot(x.cols(), cfg.hidden);
  result.model.w1 = glorot(cfg.hidden, cfg.out);

  std::uniform_int_distribution<std::size_t> any_node(0, n == 0 ? 0 : n - 1);
  std::vector<LabeledPair> pairs;
  for (int step = 0; step < cfg.steps; ++step) {
    pairs = positives;
    for (std::size_t k = 0, tries = 0; k < negatives && tries < 20 * negatives + 100; ++tries) {
      auto a = any_node(rng);
      auto b = any_node(rng);
      if (a == b || linked.contains({std::min(a, b), std::max(a, b)})) continue;
      pairs.push_back({a, b, 0.0});
      ++k;
    }
    auto lg = gcn_loss_and_grad(adj, x, result.model, pairs);
    result.loss.push_back(lg.loss);
    result.model.w0 -= cfg.step_size * lg.grad_w0;
    result.model.w1 -= cfg.step_size * lg.grad_w1;
  }

  result.embeddings.method = GraphMethod::gcn;
  result.embeddings.index =
      SynsetIndex(std::move(ids), gcn_forward(adj, x, result.model), Geometry::euclidean);
  return result;
}

using detail::matrix_from_json;
using detail::matrix_to_json;

void save_gcn_model(const std::filesystem::path& path, const GcnModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write gcn model " + path.string());
  nlohmann::json j{{"format", "taxorank-gcn/1"}, {"w0", matrix_to_json(model.w0)}, {"w1", matrix_to_json(model.w1)}};
  out << j.dump() << '\n';
}

GcnModel load_gcn_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open gcn model " + path.string());
  try {
    auto j = nlohmann::json::parse(in);
    if (j.at("format") != "taxorank-gcn/1") throw ParseError("unsupported gcn model format");
    return {matrix_from_json(j.at("w0")), matrix_from_json(j.at("w1"))};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("gcn model: ") + e.what());
  }
}

}  // namespace taxorank
