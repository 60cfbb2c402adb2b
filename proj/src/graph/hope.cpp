#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "taxorank/errors.hpp"
#include "taxorank/graph_embeddings.hpp"

namespace taxorank {

void HopeConfig::validate() const {
  if (dim <= 0 || power_iterations <= 0 || series_terms <= 0) {
    throw ConfigError("hope: counts must be positive");
  }
  if (!(beta_scale > 0) || beta_scale >= 1.0) throw ConfigError("hope: beta scale must lie in (0, 1)");
}

Matrix directed_adjacency(const Taxonomy& t) {
  auto ids = t.ids();
  const auto n = static_cast<Eigen::Index>(ids.size());
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& h : t.at(ids[static_cast<std::size_t>(i)]).hypernym_ids) {
      auto j = std::lower_bound(ids.begin(), ids.end(), h) - ids.begin();
      a(i, j) = 1.0;
    }
  }
  return a;
}

double spectral_radius_estimate(const Matrix& a, int iterations) {
  if (a.rows() == 0) return 1.0;
  Vector x = Vector::Ones(a.rows()) / std::sqrt(static_cast<double>(a.rows()));
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector y = a * x;
    estimate = y.norm();
    if (estimate == 0.0) break;  // nilpotent
    x = y / estimate;
  }
  return std::max(estimate, 1.0);
}

Matrix katz_closed_form(const Matrix& a, double beta) {
  const auto n = a.rows();
  Matrix lhs = Matrix::Identity(n, n) - beta * a;
  Eigen::PartialPivLU<Matrix> lu(lhs);
  return lu.solve(beta * a);
}

Matrix katz_series(const Matrix& a, double beta, int terms) {
  Matrix power = beta * a;
  Matrix sum = power;
  for (int l = 2; l <= terms; ++l) {
    power = beta * (power * a);
    sum += power;
  }
  return sum;
}

SparseMatrix katz_series(const SparseMatrix& a, double beta, int terms) {
  SparseMatrix power = beta * a;
  SparseMatrix sum = power;
  for (int l = 2; l <= terms; ++l) {
    power = (beta * (power * a)).pruned();
    if (power.nonZeros() == 0) break;
    sum += power;
  }
  return sum;
}

NodeEmbeddings train_hope(const Taxonomy& t, const HopeConfig& cfg) {
  cfg.validate();
  auto ids = t.ids();
  const auto n = static_cast<Eigen::Index>(ids.size());
  const Eigen::Index rank = std::max<Eigen::Index>(1, std::min<Eigen::Index>(cfg.dim, n - 1));

  TruncatedSvd svd;
  if (static_cast<std::size_t>(n) <= cfg.dense_limit) {
    Matrix a = directed_adjacency(t);
    double beta = cfg.beta_scale / spectral_radius_estimate(a, cfg.power_iterations);
    svd = truncated_svd(katz_closed_form(a, beta), rank);
  } else {
    std::vector<Eigen::Triplet<double>> entries;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (const auto& h : t.at(ids[static_cast<std::size_t>(i)]).hypernym_ids) {
        auto j = std::lower_bound(ids.begin(), ids.end(), h) - ids.begin();
        entries.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
      }
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(entries.begin(), entries.end());
    // A taxonomy is acyclic, so A is nilpotent and the radius floor applies.
    double beta = cfg.beta_scale;
    svd = randomized_svd(katz_series(a, beta, cfg.series_terms), rank, cfg.seed);
  }

  Matrix source = svd.u * svd.s.cwiseSqrt().asDiagonal();
  if (source.cols() < rank) {
    Matrix padded = Matrix::Zero(n, rank);
    padded.leftCols(source.cols()) = source;
    source = std::move(padded);
  }
  NodeEmbeddings emb;
  emb.method = GraphMethod::hope;
  emb.index = SynsetIndex(std::move(ids), std::move(source), Geometry::euclidean);
  return emb;
}

}  // namespace taxorank
