#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "selnoise/core/rng.hpp"
#include "selnoise/dataset.hpp"
#include "selnoise/eval.hpp"
#include "selnoise/models/poly.hpp"

using namespace selnoise;

namespace {

const SensitivityPredicate kPositive{0.0, Direction::above};

LabeledDataset labels_only(std::vector<double> y) {
  LabeledDataset ds;
  ds.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()), 1);
  ds.labels = y;
  ds.clean_labels = y;
  for (std::size_t i = 0; i < y.size(); ++i) ds.ids.push_back(static_cast<std::int64_t>(i));
  return ds;
}

}  // namespace

TEST(RegionMse, PerfectPredictor) {
  const LabeledDataset ds = labels_only({-1.0, 2.0, 0.5});
  const RegionMetrics m = region_mse(std::span<const double>(ds.clean_labels), ds, kPositive);
  EXPECT_EQ(*m.mse_s0, 0.0);
  EXPECT_EQ(*m.mse_s1, 0.0);
  EXPECT_FALSE(m.ratio());
}

TEST(RegionMse, ConstantZeroPredictor) {
  const LabeledDataset ds = labels_only({-1.0, 2.0});
  const std::vector<double> p{0.0, 0.0};
  const RegionMetrics m = region_mse(p, ds, kPositive);
  EXPECT_EQ(*m.mse_s0, 1.0);
  EXPECT_EQ(*m.mse_s1, 4.0);
  EXPECT_EQ(*m.ratio(), 4.0);
  EXPECT_EQ(m.n_s0, 1u);
  EXPECT_EQ(m.n_s1, 1u);
}

TEST(RegionMse, EmptyRegionIsAbsent) {
  const LabeledDataset ds = labels_only({-1.0, -2.0});
  const std::vector<double> p{0.0, 0.0};
  const RegionMetrics m = region_mse(p, ds, kPositive);
  EXPECT_FALSE(m.mse_s1);
  EXPECT_EQ(m.n_s1, 0u);
  EXPECT_THROW(region_mse(std::span<const double>(), labels_only({}), kPositive), ArgumentError);
}

TEST(RegionMse, CubicFitMatchesMaskedRecount) {
  const LabeledDataset train = gen_cubic(25, 1.0, {-1.5, 2.0}, 3);
  const LabeledDataset test = gen_cubic(200, 0.0, {-1.5, 2.0}, 4);
  const models::PolyModel fit = models::fit_polynomial(train, 3);
  const Eigen::VectorXd pv = fit.predict(test.features);
  const std::vector<double> p(pv.data(), pv.data() + pv.size());
  const RegionMetrics m = region_mse(p, test, kPositive);
  double sum[2] = {}, all = 0.0;
  std::size_t cnt[2] = {};
  for (std::size_t i = 0; i < test.size(); ++i) {
    const int k = test.clean_labels[i] > 0.0;
    const double e = (p[i] - test.clean_labels[i]) * (p[i] - test.clean_labels[i]);
    sum[k] += e;
    cnt[k] += 1;
    all += e;
  }
  EXPECT_NEAR(*m.mse_s0, sum[0] / cnt[0], 1e-15);
  EXPECT_NEAR(*m.mse_s1, sum[1] / cnt[1], 1e-15);
  const double n = static_cast<double>(test.size());
  EXPECT_NEAR((m.n_s0 * *m.mse_s0 + m.n_s1 * *m.mse_s1) / n, all / n, 1e-12);
}

TEST(BiasVariance, IdenticalModelsHaveZeroVariance) {
  const LabeledDataset ds = labels_only({-1.0, 0.5, 3.0});
  Eigen::MatrixXd p(4, 3);
  p.rowwise() = Eigen::RowVector3d(0.2, 0.1, 2.0);
  const auto r = bias_variance(p, ds, kPositive);
  for (double v : r.variance) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.T, 4u);
}

TEST(BiasVariance, TwoConstantModels) {
  const LabeledDataset ds = labels_only({1.0});
  Eigen::MatrixXd p(2, 1);
  p << 2.5, 1.5;  // c = 2, delta = 0.5
  const auto r = bias_variance(p, ds, kPositive);
  EXPECT_DOUBLE_EQ(r.variance[0], 0.25);
  EXPECT_DOUBLE_EQ(r.bias2[0], 1.0);
  EXPECT_DOUBLE_EQ(r.mse[0], 1.25);
}

TEST(BiasVariance, IdentityHoldsOnRandomEnsembles) {
  RngStream rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> y(30);
    for (double& v : y) v = rng.normal(0.0, 3.0);
    const LabeledDataset ds = labels_only(y);
    Eigen::MatrixXd p(2 + rng.below(50), 30);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.normal(1.0, 10.0);
    const auto r = bias_variance(p, ds, kPositive);
    EXPECT_LT(r.identity_error(), 1e-9);
    // Region means: mse = bias2 + var.
    EXPECT_NEAR(*r.mse_region.s1, *r.bias2_region.s1 + *r.variance_region.s1, 1e-9);
  }
}

TEST(BiasVariance, RejectsSingleModel) {
  const LabeledDataset ds = labels_only({1.0});
  EXPECT_THROW(bias_variance(Eigen::MatrixXd::Zero(1, 1), ds, kPositive), ArgumentError);
}

TEST(Parity, RecordsMatchMask) {
  const LabeledDataset ds = gen_cubic(40, 0.0, {-1.5, 2.0}, 3);
  const auto recs = parity_records(std::span<const double>(ds.clean_labels), ds, kPositive);
  const auto mask = sensitivity_mask(ds, kPositive);
  ASSERT_EQ(recs.size(), ds.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].s, mask[i]);
    EXPECT_EQ(recs[i].y, recs[i].yhat);
    EXPECT_EQ(recs[i].id, ds.ids[i]);
  }
}

TEST(Attenuation, ExactLines) {
  const std::vector<ParityRecord> half{{0, 0.0, 0.0, true}, {1, 1.0, 0.5, true}, {2, 2.0, 1.0, true}};
  EXPECT_NEAR(attenuation_slope(half, true), 0.5, 1e-15);
  const std::vector<ParityRecord> perfect{{0, -1.0, -1.0, true}, {1, 3.0, 3.0, true}};
  EXPECT_NEAR(attenuation_slope(perfect, true), 1.0, 1e-15);
  const std::vector<ParityRecord> flat{{0, -1.0, 2.0, true}, {1, 3.0, 2.0, true}};
  EXPECT_EQ(attenuation_slope(flat, true), 0.0);
}

TEST(Attenuation, UndefinedCases) {
  const std::vector<ParityRecord> constant{{0, 1.0, 0.0, true}, {1, 1.0, 2.0, true}};
  EXPECT_THROW(attenuation_slope(constant, true), UndefinedSlopeError);
  EXPECT_THROW(attenuation_slope(constant, false), UndefinedSlopeError);
}
