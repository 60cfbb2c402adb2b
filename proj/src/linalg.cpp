#include "taxorank/linalg.hpp"

#include <algorithm>
#include <random>

#include <Eigen/SVD>

namespace taxorank {

TruncatedSvd truncated_svd(const Eigen::MatrixXd& x, Eigen::Index rank) {
  rank = std::min({rank, x.rows(), x.cols()});
  if (rank <= 0) return {Eigen::MatrixXd(x.rows(), 0), Eigen::VectorXd(0), Eigen::MatrixXd(x.cols(), 0)};
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU().leftCols(rank), svd.singularValues().head(rank),
          svd.matrixV().leftCols(rank)};
}

TruncatedSvd randomized_svd(const SparseMatrix& x, Eigen::Index rank, std::uint64_t seed,
                            int power_iterations, Eigen::Index oversample) {
  rank = std::min({rank, x.rows(), x.cols()});
  if (rank <= 0) return {Eigen::MatrixXd(x.rows(), 0), Eigen::VectorXd(0), Eigen::MatrixXd(x.cols(), 0)};
  const Eigen::Index width = std::min(rank + oversample, std::min(x.rows(), x.cols()));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd omega(x.cols(), width);
  for (Eigen::Index j = 0; j < omega.cols(); ++j) {
    for (Eigen::Index i = 0; i < omega.rows(); ++i) omega(i, j) = gauss(rng);
  }
  auto orthonormal = [](const Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  };
  Eigen::MatrixXd q = orthonormal(x * omega);
  for (int it = 0; it < power_iterations; ++it) {
    Eigen::MatrixXd z = orthonormal(x.transpose() * q);
    q = orthonormal(x * z);
  }
  Eigen::MatrixXd b = (x.transpose() * q).transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {q * svd.matrixU().leftCols(rank), svd.singularValues().head(rank),
          svd.matrixV().leftCols(rank)};
}

}  // namespace taxorank
