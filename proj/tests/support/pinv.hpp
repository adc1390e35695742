#pragma once

// Minimum-norm least squares via SVD pseudo-inverse, built independently of
// the QR route used by fit_polynomial.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace selnoise::test_support {

inline Eigen::VectorXd pinv_solve(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(x.size()), degree + 1);
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (int k = 0; k <= degree; ++k) v(i, k) = std::pow(x[static_cast<std::size_t>(i)], k);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  const double tol = s[0] * 1e-13 * static_cast<double>(v.rows());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tol) inv[i] = 1.0 / s[i];
  const Eigen::Map<const Eigen::VectorXd> rhs(y.data(), static_cast<Eigen::Index>(y.size()));
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * rhs;
}

}  // namespace selnoise::test_support
