#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "selnoise/core/error.hpp"

namespace selnoise::models {

enum class OptimizerKind { adam, gradient_descent };

struct TrainConfig {
  std::size_t epochs = 60;
  double learning_rate = 0.01;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  // GCN only: keep the parameters of the epoch with the lowest validation MSE.
  bool retain_best_validation = true;

  void validate() const {
    if (epochs < 1) throw ArgumentError("epochs must be at least 1");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  }
};

// Full-batch first-order optimizer over a flat parameter vector.
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, Eigen::Index n_params)
      : cfg_(cfg), m_(Eigen::VectorXd::Zero(n_params)), v_(Eigen::VectorXd::Zero(n_params)) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (cfg_.optimizer == OptimizerKind::gradient_descent) {
      params -= cfg_.learning_rate * grad;
      return;
    }
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (Eigen::Index i = 0; i < params.size(); ++i) {
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      params[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }

 private:
  TrainConfig cfg_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long t_ = 0;
};

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "gd"; }

}  // namespace selnoise::models
