#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "selnoise/core/error.hpp"
#include "selnoise/core/rng.hpp"
#include "selnoise/dataset_types.hpp"
#include "selnoise/models/optimizer.hpp"

namespace selnoise::models {

// Fully connected regressor: rectifier on hidden layers, identity output.
// Parameters live in one flat vector; layer l stores its (out x in) weight
// matrix column-major followed by its bias.
class MlpModel {
 public:
  MlpModel() = default;

  // dims = (input, hidden..., 1)
  explicit MlpModel(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw ArgumentError("MLP needs at least input and output layers");
    if (dims_.back() != 1) throw ArgumentError("MLP output dimension must be 1");
    for (int d : dims_)
      if (d < 1) throw ArgumentError("MLP layer sizes must be positive");
    Eigen::Index total = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      offsets_.push_back(total);
      total += static_cast<Eigen::Index>(dims_[l + 1]) * (dims_[l] + 1);
    }
    params_ = Eigen::VectorXd::Zero(total);
  }

  // Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static MlpModel initialized(std::vector<int> dims, RngStream rng) {
    MlpModel m(std::move(dims));
    for (std::size_t l = 0; l < m.layers(); ++l) {
      const double limit = std::sqrt(6.0 / (m.dims_[l] + m.dims_[l + 1]));
      auto w = m.weight(l);
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-limit, limit);
    }
    return m;
  }

  const std::vector<int>& dims() const noexcept { return dims_; }
  std::size_t layers() const noexcept { return dims_.size() - 1; }
  Eigen::VectorXd& parameters() noexcept { return params_; }
  const Eigen::VectorXd& parameters() const noexcept { return params_; }

  Eigen::Map<Eigen::MatrixXd> weight(std::size_t l) {
    return {params_.data() + offsets_[l], dims_[l + 1], dims_[l]};
  }
  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t l) const {
    return {params_.data() + offsets_[l], dims_[l + 1], dims_[l]};
  }
  Eigen::Map<Eigen::VectorXd> bias(std::size_t l) {
    return {params_.data() + offsets_[l] + Eigen::Index{dims_[l + 1]} * dims_[l], dims_[l + 1]};
  }
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t l) const {
    return {params_.data() + offsets_[l] + Eigen::Index{dims_[l + 1]} * dims_[l], dims_[l + 1]};
  }

  // Row-wise predictions for an n x input matrix.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    check_input(x);
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < layers(); ++l) {
      Eigen::MatrixXd z = a * weight(l).transpose();
      z.rowwise() += bias(l).transpose();
      a = l + 1 < layers() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
    }
    return a.col(0);
  }

  double predict_one(const Eigen::VectorXd& x) const { return predict(x.transpose())[0]; }

  // Mean squared error over the batch; writes d(loss)/d(params) into grad.
  double loss_and_gradient(const Eigen::MatrixXd& x, std::span<const double> y, Eigen::VectorXd& grad) const {
    check_input(x);
    const Eigen::Index n = x.rows();
    if (static_cast<std::size_t>(n) != y.size()) throw ArgumentError("feature and label counts differ");
    grad = Eigen::VectorXd::Zero(params_.size());
    if (n == 0) return 0.0;
    std::vector<Eigen::MatrixXd> acts{x};  // inputs to each layer
    std::vector<Eigen::MatrixXd> pre;      // pre-activations
    for (std::size_t l = 0; l < layers(); ++l) {
      Eigen::MatrixXd z = acts.back() * weight(l).transpose();
      z.rowwise() += bias(l).transpose();
      pre.push_back(z);
      if (l + 1 < layers()) acts.push_back(z.cwiseMax(0.0));
    }
    const Eigen::Map<const Eigen::VectorXd> target(y.data(), n);
    const Eigen::VectorXd resid = pre.back().col(0) - target;
    const double loss = resid.squaredNorm() / static_cast<double>(n);

    Eigen::MatrixXd delta = (2.0 / static_cast<double>(n)) * resid;  // n x 1
    for (std::size_t l = layers(); l-- > 0;) {
      Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], dims_[l + 1], dims_[l]);
      Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + Eigen::Index{dims_[l + 1]} * dims_[l], dims_[l + 1]);
      gw.noalias() = delta.transpose() * acts[l];
      gb = delta.colwise().sum().transpose();
      if (l > 0) {
        Eigen::MatrixXd back = delta * weight(l);
        delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
      }
    }
    return loss;
  }

  double loss(const Eigen::MatrixXd& x, std::span<const double> y) const {
    const Eigen::VectorXd p = predict(x);
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) s += (p[i] - y[i]) * (p[i] - y[i]);
    return p.size() ? s / static_cast<double>(p.size()) : 0.0;
  }

 private:
  void check_input(const Eigen::MatrixXd& x) const {
    if (x.cols() != dims_.front()) throw ArgumentError("feature dimension does not match MLP input");
  }

  std::vector<int> dims_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd params_;
};

struct TrainTrace {
  std::vector<double> loss;  // training loss before each update
};

// Full-batch training on MSE. Initialization is drawn from the config seed.
inline MlpModel mlp_train(const LabeledDataset& train, const TrainConfig& cfg, const std::vector<int>& hidden,
                          TrainTrace* trace = nullptr) {
  cfg.validate();
  std::vector<int> dims{static_cast<int>(train.dim())};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  MlpModel model = MlpModel::initialized(dims, RngStream(cfg.seed).substream("mlp-init"));
  Optimizer opt(cfg, model.parameters().size());
  Eigen::VectorXd grad;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double loss = model.loss_and_gradient(train.features, train.labels, grad);
    if (!std::isfinite(loss) || !grad.allFinite()) throw TrainingDivergedError(epoch);
    if (trace) trace->loss.push_back(loss);
    opt.step(model.parameters(), grad);
  }
  return model;
}

inline double mlp_predict(const MlpModel& model, const Eigen::VectorXd& x) { return model.predict_one(x); }

}  // namespace selnoise::models
