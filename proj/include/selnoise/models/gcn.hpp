#pragma once

// Two-layer graph convolutional regressor:
//   H1 = relu(A X W1), H2 = relu(A H1 W2), g = mean over atoms of H2, y = g.w + b
// where A is the self-loop normalized adjacency from featurize_graph.

#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "selnoise/chem/featurize.hpp"
#include "selnoise/chem/smiles.hpp"
#include "selnoise/core/error.hpp"
#include "selnoise/core/rng.hpp"
#include "selnoise/dataset_types.hpp"
#include "selnoise/models/optimizer.hpp"

namespace selnoise::models {

// A featurized molecule with the constant product A X cached.
struct GraphSample {
  Eigen::MatrixXd adjacency;
  Eigen::MatrixXd propagated;  // A X

  static GraphSample from(const chem::GraphFeatures& g) { return {g.adjacency, g.adjacency * g.nodes}; }
  static GraphSample from(const chem::MolGraph& m) { return from(chem::featurize_graph(m)); }
};

inline std::vector<GraphSample> featurize_all(const MolecularDataset& ds) {
  std::vector<GraphSample> out;
  out.reserve(ds.size());
  for (const auto& s : ds.smiles) out.push_back(GraphSample::from(chem::parse_smiles(s)));
  return out;
}

// Flat parameter layout: W1 (F x H), W2 (H x H), w (H), b (1), column-major.
class GcnModel {
 public:
  GcnModel() : GcnModel(chem::kNodeFeatures, 16) {}

  GcnModel(int features, int hidden) : features_(features), hidden_(hidden) {
    if (features < 1 || hidden < 1) throw ArgumentError("GCN sizes must be positive");
    params_ = Eigen::VectorXd::Zero(Eigen::Index{features} * hidden + Eigen::Index{hidden} * hidden + hidden + 1);
  }

  static GcnModel initialized(int features, int hidden, RngStream rng) {
    GcnModel m(features, hidden);
    auto fill = [&](auto mat, int fan_in, int fan_out) {
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      for (Eigen::Index j = 0; j < mat.cols(); ++j)
        for (Eigen::Index i = 0; i < mat.rows(); ++i) mat(i, j) = rng.uniform(-limit, limit);
    };
    fill(m.w1(), features, hidden);
    fill(m.w2(), hidden, hidden);
    fill(m.head(), hidden, 1);
    return m;
  }

  int features() const noexcept { return features_; }
  int hidden() const noexcept { return hidden_; }
  Eigen::VectorXd& parameters() noexcept { return params_; }
  const Eigen::VectorXd& parameters() const noexcept { return params_; }

  Eigen::Map<Eigen::MatrixXd> w1() { return {params_.data(), features_, hidden_}; }
  Eigen::Map<const Eigen::MatrixXd> w1() const { return {params_.data(), features_, hidden_}; }
  Eigen::Map<Eigen::MatrixXd> w2() { return {params_.data() + off_w2(), hidden_, hidden_}; }
  Eigen::Map<const Eigen::MatrixXd> w2() const { return {params_.data() + off_w2(), hidden_, hidden_}; }
  Eigen::Map<Eigen::VectorXd> head() { return {params_.data() + off_head(), hidden_}; }
  Eigen::Map<const Eigen::VectorXd> head() const { return {params_.data() + off_head(), hidden_}; }
  double& head_bias() { return params_[off_head() + hidden_]; }
  double head_bias() const { return params_[off_head() + hidden_]; }

  double predict(const GraphSample& g) const {
    check(g);
    const Eigen::MatrixXd h1 = (g.propagated * w1()).cwiseMax(0.0);
    const Eigen::MatrixXd h2 = (g.adjacency * h1 * w2()).cwiseMax(0.0);
    const Eigen::VectorXd readout = h2.colwise().mean().transpose();
    return readout.dot(head()) + head_bias();
  }

  double predict(const chem::MolGraph& m) const { return predict(GraphSample::from(m)); }

  // Mean over molecules of squared error; gradient accumulated in sample order.
  double loss_and_gradient(std::span<const GraphSample> batch, std::span<const double> y, Eigen::VectorXd& grad) const {
    if (batch.size() != y.size()) throw ArgumentError("graph and label counts differ");
    grad = Eigen::VectorXd::Zero(params_.size());
    if (batch.empty()) return 0.0;
    Eigen::Map<Eigen::MatrixXd> g_w1(grad.data(), features_, hidden_);
    Eigen::Map<Eigen::MatrixXd> g_w2(grad.data() + off_w2(), hidden_, hidden_);
    Eigen::Map<Eigen::VectorXd> g_head(grad.data() + off_head(), hidden_);
    double& g_bias = grad[off_head() + hidden_];
    const double scale = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const GraphSample& g = batch[k];
      check(g);
      const Eigen::MatrixXd z1 = g.propagated * w1();
      const Eigen::MatrixXd h1 = z1.cwiseMax(0.0);
      const Eigen::MatrixXd ah1 = g.adjacency * h1;
      const Eigen::MatrixXd z2 = ah1 * w2();
      const Eigen::MatrixXd h2 = z2.cwiseMax(0.0);
      const Eigen::VectorXd readout = h2.colwise().mean().transpose();
      const double pred = readout.dot(head()) + head_bias();
      const double r = pred - y[k];
      loss += scale * r * r;

      const double d_pred = 2.0 * scale * r;
      g_head += d_pred * readout;
      g_bias += d_pred;
      const double atoms = static_cast<double>(g.adjacency.rows());
      const Eigen::RowVectorXd d_readout = (d_pred / atoms) * head().transpose();
      const Eigen::MatrixXd d_z2 = (z2.array() > 0.0).cast<double>().matrix().array().rowwise() * d_readout.array();
      g_w2.noalias() += ah1.transpose() * d_z2;
      const Eigen::MatrixXd d_h1 = g.adjacency.transpose() * (d_z2 * w2().transpose());
      const Eigen::MatrixXd d_z1 = d_h1.cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
      g_w1.noalias() += g.propagated.transpose() * d_z1;
    }
    return loss;
  }

  double loss(std::span<const GraphSample> batch, std::span<const double> y) const {
    double s = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const double r = predict(batch[k]) - y[k];
      s += r * r;
    }
    return batch.empty() ? 0.0 : s / static_cast<double>(batch.size());
  }

 private:
  Eigen::Index off_w2() const { return Eigen::Index{features_} * hidden_; }
  Eigen::Index off_head() const { return off_w2() + Eigen::Index{hidden_} * hidden_; }
  void check(const GraphSample& g) const {
    if (g.propagated.cols() != features_) throw ArgumentError("graph features do not match GCN input");
  }

  int features_;
  int hidden_;
  Eigen::VectorXd params_;
};

struct GcnTrace {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::size_t best_epoch = 0;
};

inline GcnModel gcn_train(std::span<const GraphSample> train, std::span<const double> train_y,
                          std::span<const GraphSample> val, std::span<const double> val_y, const TrainConfig& cfg,
                          int hidden = 16, GcnTrace* trace = nullptr) {
  cfg.validate();
  GcnModel model = GcnModel::initialized(chem::kNodeFeatures, hidden, RngStream(cfg.seed).substream("gcn-init"));
  // Output bias starts at the label mean.
  if (!train_y.empty())
    model.head_bias() = std::accumulate(train_y.begin(), train_y.end(), 0.0) / static_cast<double>(train_y.size());
  Optimizer opt(cfg, model.parameters().size());
  Eigen::VectorXd grad;
  Eigen::VectorXd best = model.parameters();
  double best_val = std::numeric_limits<double>::infinity();
  const bool use_val = cfg.retain_best_validation && !val.empty();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double loss = model.loss_and_gradient(train, train_y, grad);
    if (!std::isfinite(loss) || !grad.allFinite()) throw TrainingDivergedError(epoch);
    opt.step(model.parameters(), grad);
    if (trace) trace->train_loss.push_back(loss);
    if (use_val) {
      const double v = model.loss(val, val_y);
      if (!std::isfinite(v)) throw TrainingDivergedError(epoch);
      if (trace) trace->val_loss.push_back(v);
      if (v < best_val) {
        best_val = v;
        best = model.parameters();
        if (trace) trace->best_epoch = epoch;
      }
    }
  }
  if (use_val) model.parameters() = best;
  return model;
}

inline GcnModel gcn_train(const MolecularDataset& train, const MolecularDataset& val, const TrainConfig& cfg,
                          int hidden = 16, GcnTrace* trace = nullptr) {
  const auto tg = featurize_all(train);
  const auto vg = featurize_all(val);
  return gcn_train(tg, train.labels, vg, val.labels, cfg, hidden, trace);
}

inline double gcn_predict(const GcnModel& model, const chem::MolGraph& mol) { return model.predict(mol); }

}  // namespace selnoise::models
