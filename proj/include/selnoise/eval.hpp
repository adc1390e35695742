#pragma once

// Region-wise error, ensemble bias/variance, parity records and attenuation.
// Metrics are always computed against clean labels.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "selnoise/core/error.hpp"
#include "selnoise/dataset_types.hpp"

namespace selnoise {

struct RegionMetrics {
  std::optional<double> mse_s0;  // absent when the region is empty
  std::optional<double> mse_s1;
  std::size_t n_s0 = 0;
  std::size_t n_s1 = 0;

  std::optional<double> ratio() const {
    if (!mse_s0 || !mse_s1 || *mse_s0 == 0.0) return std::nullopt;
    return *mse_s1 / *mse_s0;
  }
};

namespace detail {

inline void check_lengths(std::size_t predictions, std::size_t rows) {
  if (predictions != rows) throw ArgumentError("prediction count does not match test rows");
}

}  // namespace detail

template <typename Dataset>
RegionMetrics region_mse(std::span<const double> predictions, const Dataset& test, const SensitivityPredicate& s) {
  if (test.size() == 0) throw ArgumentError("test set is empty");
  detail::check_lengths(predictions.size(), test.size());
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < test.size(); ++i) {
    const int k = s(test.clean_labels[i]) ? 1 : 0;
    const double r = predictions[i] - test.clean_labels[i];
    sum[k] += r * r;
    ++count[k];
  }
  RegionMetrics m;
  m.n_s0 = count[0];
  m.n_s1 = count[1];
  if (count[0]) m.mse_s0 = sum[0] / static_cast<double>(count[0]);
  if (count[1]) m.mse_s1 = sum[1] / static_cast<double>(count[1]);
  return m;
}

// `predict(dataset, i)` returns the model output for test row i.
template <typename Dataset, typename Predict>
std::vector<double> predict_all(const Dataset& test, Predict&& predict) {
  std::vector<double> out(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) out[i] = predict(test, i);
  return out;
}

struct RegionAverages {
  std::optional<double> s0;
  std::optional<double> s1;
};

struct BiasVarianceReport {
  std::size_t T = 0;
  std::vector<double> mean_prediction;
  std::vector<double> bias2;     // (mean - y)^2
  std::vector<double> variance;  // population variance over the ensemble
  std::vector<double> mse;       // mean over models of (f_t - y)^2
  std::vector<bool> region;
  RegionAverages bias2_region;
  RegionAverages variance_region;
  RegionAverages mse_region;
  std::size_t n_s0 = 0;
  std::size_t n_s1 = 0;

  std::optional<double> ratio() const {
    if (!mse_region.s0 || !mse_region.s1 || *mse_region.s0 == 0.0) return std::nullopt;
    return *mse_region.s1 / *mse_region.s0;
  }

  // max over points of |bias2 + variance - mse|
  double identity_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < mse.size(); ++i) worst = std::max(worst, std::abs(bias2[i] + variance[i] - mse[i]));
    return worst;
  }
};

// predictions: T x n, row t holds model t's outputs on the test rows.
template <typename Dataset>
BiasVarianceReport bias_variance(const Eigen::MatrixXd& predictions, const Dataset& test,
                                 const SensitivityPredicate& s) {
  const auto T = static_cast<std::size_t>(predictions.rows());
  if (T < 2) throw ArgumentError("bias/variance needs at least 2 models");
  detail::check_lengths(static_cast<std::size_t>(predictions.cols()), test.size());
  BiasVarianceReport r;
  r.T = T;
  const std::size_t n = test.size();
  r.mean_prediction.resize(n);
  r.bias2.resize(n);
  r.variance.resize(n);
  r.mse.resize(n);
  r.region = sensitivity_mask(test, s);
  double sums[3][2] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = predictions.col(static_cast<Eigen::Index>(i));
    const double y = test.clean_labels[i];
    double mean = 0.0;
    for (Eigen::Index t = 0; t < col.size(); ++t) mean += col[t];
    mean /= static_cast<double>(T);
    double var = 0.0, err = 0.0;
    for (Eigen::Index t = 0; t < col.size(); ++t) {
      var += (col[t] - mean) * (col[t] - mean);
      err += (col[t] - y) * (col[t] - y);
    }
    r.mean_prediction[i] = mean;
    r.bias2[i] = (mean - y) * (mean - y);
    r.variance[i] = var / static_cast<double>(T);
    r.mse[i] = err / static_cast<double>(T);
    const int k = r.region[i] ? 1 : 0;
    sums[0][k] += r.bias2[i];
    sums[1][k] += r.variance[i];
    sums[2][k] += r.mse[i];
    (k ? r.n_s1 : r.n_s0) += 1;
  }
  auto avg = [&](int q) {
    RegionAverages a;
    if (r.n_s0) a.s0 = sums[q][0] / static_cast<double>(r.n_s0);
    if (r.n_s1) a.s1 = sums[q][1] / static_cast<double>(r.n_s1);
    return a;
  };
  r.bias2_region = avg(0);
  r.variance_region = avg(1);
  r.mse_region = avg(2);
  return r;
}

struct ParityRecord {
  std::int64_t id = 0;
  double y = 0.0;
  double yhat = 0.0;
  bool s = false;
};

template <typename Dataset>
std::vector<ParityRecord> parity_records(std::span<const double> predictions, const Dataset& test,
                                         const SensitivityPredicate& s) {
  detail::check_lengths(predictions.size(), test.size());
  std::vector<ParityRecord> out;
  out.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i)
    out.push_back({test.ids[i], test.clean_labels[i], predictions[i], s(test.clean_labels[i])});
  return out;
}

// Least-squares slope of yhat on y over records in the given region.
inline double attenuation_slope(std::span<const ParityRecord> records, bool region) {
  double sy = 0.0, sp = 0.0;
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.s == region) {
      sy += r.y;
      sp += r.yhat;
      ++n;
    }
  if (n < 2) throw UndefinedSlopeError("slope needs at least 2 records in the region");
  const double my = sy / static_cast<double>(n), mp = sp / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& r : records)
    if (r.s == region) {
      sxx += (r.y - my) * (r.y - my);
      sxy += (r.y - my) * (r.yhat - mp);
    }
  if (sxx == 0.0) throw UndefinedSlopeError("labels are constant in the region");
  return sxy / sxx;
}

}  // namespace selnoise
