#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace taxorank {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Rank-r factorisation X ~ U diag(s) V^T with singular values descending.
struct TruncatedSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd v;
};

/// Exact truncation of a full SVD; r is clamped to min(rows, cols).
TruncatedSvd truncated_svd(const Eigen::MatrixXd& x, Eigen::Index rank);

/// Randomised range finder (Halko et al.) for sparse inputs too large for a
/// dense decomposition.
TruncatedSvd randomized_svd(const SparseMatrix& x, Eigen::Index rank, std::uint64_t seed,
                            int power_iterations = 4, Eigen::Index oversample = 10);

}  // namespace taxorank
