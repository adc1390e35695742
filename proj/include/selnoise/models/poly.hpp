#pragma once

#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "selnoise/core/error.hpp"
#include "selnoise/dataset_types.hpp"

namespace selnoise::models {

struct PolyModel {
  int degree = 0;
  Eigen::VectorXd coefficients;  // ascending powers

  double predict(double x) const {
    double acc = 0.0;
    for (Eigen::Index k = coefficients.size(); k-- > 0;) acc = acc * x + coefficients[k];
    return acc;
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict(x(i, 0));
    return out;
  }
};

inline Eigen::MatrixXd vandermonde(std::span<const double> x, int degree) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(x.size()), degree + 1);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      v(i, k) = p;
      p *= x[static_cast<std::size_t>(i)];
    }
  }
  return v;
}

// Least squares through a column-pivoting Householder QR of the Vandermonde
// matrix (normal equations square the condition number).
inline PolyModel fit_polynomial(std::span<const double> x, std::span<const double> y, int degree) {
  if (degree < 0) throw ArgumentError("degree must be non-negative");
  if (x.size() != y.size()) throw ArgumentError("x and y lengths differ");
  const std::set<double> distinct(x.begin(), x.end());
  if (distinct.size() < static_cast<std::size_t>(degree) + 1)
    throw SingularFitError("need at least degree+1 distinct x values, got " + std::to_string(distinct.size()));
  const Eigen::MatrixXd v = vandermonde(x, degree);
  const Eigen::Map<const Eigen::VectorXd> rhs(y.data(), static_cast<Eigen::Index>(y.size()));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
  if (qr.rank() < degree + 1) throw SingularFitError("Vandermonde system is rank deficient");
  PolyModel model;
  model.degree = degree;
  model.coefficients = qr.solve(rhs);
  if (!model.coefficients.allFinite()) throw SingularFitError("non-finite coefficients");
  return model;
}

inline PolyModel fit_polynomial(const LabeledDataset& train, int degree) {
  if (train.dim() != 1) throw ArgumentError("polynomial fit needs 1-D features");
  std::vector<double> x(train.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = train.features(static_cast<Eigen::Index>(i), 0);
  return fit_polynomial(x, train.labels, degree);
}

}  // namespace selnoise::models
