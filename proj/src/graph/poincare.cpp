#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "taxorank/errors.hpp"
#include "taxorank/graph_embeddings.hpp"

namespace taxorank {

void PoincareConfig::validate() const {
  if (dim <= 0 || epochs <= 0 || negatives <= 0 || burn_in < 0) {
    throw ConfigError("poincare: counts must be positive");
  }
  if (!(lr > 0) || !(burn_in_factor > 0) || !(init_range > 0)) {
    throw ConfigError("poincare: learning rates must be positive");
  }
  if (!(eps > 0) || eps > 1e-3) throw ConfigError("poincare: ball epsilon must lie in (0, 1e-3]");
}

namespace {

// Euclidean gradient of d(u, v) with respect to u.
Vector distance_grad_u(const Vector& u, const Vector& v, double uu, double vv, double gamma) {
  double alpha = 1.0 - uu;
  double beta = 1.0 - vv;
  double root = std::sqrt(gamma * gamma - 1.0);
  if (root < 1e-12) return Vector::Zero(u.size());
  double uv = u.dot(v);
  double scale = 4.0 / (beta * root);
  return scale * (((vv - 2.0 * uv + 1.0) / (alpha * alpha)) * u - v / alpha);
}

}  // namespace

NodeEmbeddings train_poincare(const Taxonomy& t, const PoincareConfig& cfg, const EpochObserver& observer) {
  cfg.validate();
  auto ids = t.ids();
  const std::size_t n = ids.size();
  auto index_of = [&](const std::string& id) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::set<std::size_t>> linked(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& h : t.at(ids[i]).hypernym_ids) {
      auto j = index_of(h);
      edges.emplace_back(i, j);
      linked[i].insert(j);
      linked[j].insert(i);
    }
  }
  if (edges.empty()) throw ConfigError("poincare: taxonomy has no edges to train on");

  std::mt19937_64 rng(cfg.seed);
  const auto dim = static_cast<Eigen::Index>(cfg.dim);
  Matrix theta(static_cast<Eigen::Index>(n), dim);
  std::uniform_real_distribution<double> init(-cfg.init_range, cfg.init_range);
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) theta(i, j) = init(rng);
  }
  std::uniform_int_distribution<std::size_t> any_node(0, n - 1);

  auto step = [&](std::size_t node, const Vector& euclid_grad, double lr) {
    auto row = theta.row(static_cast<Eigen::Index>(node));
    double scale = std::pow(1.0 - row.squaredNorm(), 2) / 4.0;
    Vector updated = row.transpose() - lr * scale * euclid_grad;
    if (!updated.allFinite()) throw NonFiniteLossError("poincare: non-finite update");
    project_to_ball(updated, cfg.eps);
    if (updated.squaredNorm() >= 1.0) throw OutOfBallError("poincare: update left the ball");
    row = updated.transpose();
  };

  std::vector<std::size_t> candidates;
  std::vector<double> dist;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = epoch < cfg.burn_in ? cfg.lr * cfg.burn_in_factor : cfg.lr;
    std::shuffle(edges.begin(), edges.end(), rng);
    for (const auto& [u, v] : edges) {
      candidates.assign({v});
      // Negatives: nodes not linked to u. Give up after a bounded number of
      // draws on dense neighbourhoods.
      for (int tries = 0; candidates.size() <= static_cast<std::size_t>(cfg.negatives) &&
                          tries < 10 * cfg.negatives;
           ++tries) {
        auto cand = any_node(rng);
        if (cand != u && !linked[u].contains(cand)) candidates.push_back(cand);
      }
      Vector tu = theta.row(static_cast<Eigen::Index>(u)).transpose();
      double uu = tu.squaredNorm();
      dist.assign(candidates.size(), 0.0);
      std::vector<double> gammas(candidates.size());
      double max_neg = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        Vector tv = theta.row(static_cast<Eigen::Index>(candidates[c])).transpose();
        double vv = tv.squaredNorm();
        gammas[c] = std::max(1.0, 1.0 + 2.0 * (tu - tv).squaredNorm() / ((1.0 - uu) * (1.0 - vv)));
        dist[c] = std::acosh(gammas[c]);
        max_neg = std::max(max_neg, -dist[c]);
      }
      // Softmax over negative distances; loss = d_pos + log sum exp(-d).
      double z = 0.0;
      std::vector<double> prob(candidates.size());
      for (std::size_t c = 0; c < candidates.size(); ++c) z += prob[c] = std::exp(-dist[c] - max_neg);
      for (auto& p : prob) p /= z;

      Vector grad_u = Vector::Zero(dim);
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        double coeff = (c == 0 ? 1.0 : 0.0) - prob[c];
        if (coeff == 0.0) continue;
        Vector tv = theta.row(static_cast<Eigen::Index>(candidates[c])).transpose();
        double vv = tv.squaredNorm();
        grad_u += coeff * distance_grad_u(tu, tv, uu, vv, gammas[c]);
        step(candidates[c], coeff * distance_grad_u(tv, tu, vv, uu, gammas[c]), lr);
      }
      step(u, grad_u, lr);
    }
    if (observer) observer(epoch, theta);
  }

  NodeEmbeddings emb;
  emb.method = GraphMethod::poincare;
  emb.index = SynsetIndex(std::move(ids), std::move(theta), Geometry::poincare);
  return emb;
}

}  // namespace taxorank
