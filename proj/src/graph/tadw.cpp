#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "taxorank/errors.hpp"
#include "taxorank/graph_embeddings.hpp"

namespace taxorank {

void TadwConfig::validate() const {
  if (dim <= 0 || iterations <= 0 || text_dim <= 0) throw ConfigError("tadw: counts must be positive");
  if (!(lambda >= 0)) throw ConfigError("tadw: lambda must be non-negative");
}

Matrix tadw_proximity(const Taxonomy& t) {
  auto adj = undirected_adjacency(t);
  const auto n = static_cast<Eigen::Index>(adj.size());
  Matrix s = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& nbrs = adj[static_cast<std::size_t>(i)];
    for (auto j : nbrs) s(i, static_cast<Eigen::Index>(j)) = 1.0 / static_cast<double>(nbrs.size());
  }
  return (s + s * s) / 2.0;
}

Matrix tadw_text_features(const SynsetIndex& features, const Taxonomy& t, int text_dim) {
  auto ids = t.ids();
  Matrix x(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(features.dim()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto p = features.position(ids[i]);
    if (p < 0) throw ConfigError("tadw: no text features for synset " + ids[i]);
    x.row(static_cast<Eigen::Index>(i)) = features.rows().row(p);
  }
  auto svd = truncated_svd(x, text_dim);
  Matrix reduced = svd.u * svd.s.asDiagonal();  // |V| x f
  Matrix text = reduced.transpose();             // f x |V|
  for (Eigen::Index j = 0; j < text.cols(); ++j) {
    double n = text.col(j).norm();
    if (n > 0) text.col(j) /= n;
  }
  return text;
}

double tadw_objective(const Matrix& m, const Matrix& w, const Matrix& h, const Matrix& text,
                      double lambda) {
  return (m - w.transpose() * h * text).squaredNorm() +
         lambda / 2.0 * (w.squaredNorm() + h.squaredNorm());
}

TadwResult train_tadw_detailed(const Taxonomy& t, const SynsetIndex& text_features, const TadwConfig& cfg) {
  cfg.validate();
  const Matrix m = tadw_proximity(t);
  const Matrix text = tadw_text_features(text_features, t, cfg.text_dim);
  const auto k = static_cast<Eigen::Index>(cfg.dim);
  const auto f = text.rows();
  const double half_lambda = cfg.lambda / 2.0;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 0.1);
  Matrix w(k, m.cols());
  Matrix h(k, f);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = gauss(rng);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = gauss(rng);

  // Spectral factors of T T^T do not change across iterations.
  Eigen::SelfAdjointEigenSolver<Matrix> text_eig(text * text.transpose());
  const Matrix& q = text_eig.eigenvectors();
  const Vector& omega = text_eig.eigenvalues();
  const Matrix mt = m * text.transpose();  // |V| x f

  TadwResult result;
  result.objective.push_back(tadw_objective(m, w, h, text, cfg.lambda));
  for (int it = 0; it < cfg.iterations; ++it) {
    // W step: W^T (B B^T + lambda/2 I) = M B^T with B = H T.
    Matrix b = h * text;
    Matrix gram = b * b.transpose() + half_lambda * Matrix::Identity(k, k);
    Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw SingularSolveError("tadw: W step system is singular");
    }
    w = ldlt.solve(b * m.transpose());
    if (!w.allFinite()) throw SingularSolveError("tadw: W step produced non-finite values");
    result.objective.push_back(tadw_objective(m, w, h, text, cfg.lambda));

    // H step: (W W^T) H (T T^T) + lambda/2 H = W M T^T, solved in the joint
    // eigenbasis of the two Gram matrices.
    Eigen::SelfAdjointEigenSolver<Matrix> w_eig(w * w.transpose());
    const Matrix& p = w_eig.eigenvectors();
    const Vector& lam = w_eig.eigenvalues();
    Matrix c = p.transpose() * (w * mt) * q;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index j = 0; j < c.cols(); ++j) {
        double denom = std::max(lam[i], 0.0) * std::max(omega[j], 0.0) + half_lambda;
        if (denom <= 0.0) {
          if (c(i, j) != 0.0) throw SingularSolveError("tadw: H step system is singular");
          c(i, j) = 0.0;
        } else {
          c(i, j) /= denom;
        }
      }
    }
    h = p * c * q.transpose();
    result.objective.push_back(tadw_objective(m, w, h, text, cfg.lambda));
  }

  result.embeddings.method = GraphMethod::tadw;
  result.embeddings.index = SynsetIndex(t.ids(), w.transpose(), Geometry::euclidean);
  result.w = std::move(w);
  result.h = std::move(h);
  return result;
}

NodeEmbeddings train_tadw(const Taxonomy& t, const SynsetIndex& text_features, const TadwConfig& cfg) {
  return train_tadw_detailed(t, text_features, cfg).embeddings;
}

}  // namespace taxorank
