#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "selnoise/core/error.hpp"

namespace selnoise::models {

// Max over parameters of |g_a - g_n| / max(|g_a| + |g_n|, 1e-8), comparing the
// analytic gradient against central differences of step epsilon.
//
// `loss_and_grad(params, grad)` returns the loss at `params` and writes the
// analytic gradient; `loss(params)` returns the loss only.
template <typename LossAndGrad, typename Loss>
double max_relative_gradient_error(Eigen::VectorXd params, LossAndGrad&& loss_and_grad, Loss&& loss, double epsilon) {
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  Eigen::VectorXd analytic;
  loss_and_grad(params, analytic);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + epsilon;
    const double up = loss(params);
    params[i] = saved - epsilon;
    const double down = loss(params);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double err = std::abs(analytic[i] - numeric) / std::max(std::abs(analytic[i]) + std::abs(numeric), 1e-8);
    worst = std::max(worst, err);
  }
  return worst;
}

// Convenience over any model exposing parameters() and
// loss_and_gradient(inputs, targets, grad).
template <typename Model, typename Inputs, typename Targets>
double grad_check(const Model& model, const Inputs& inputs, const Targets& targets, double epsilon) {
  Model work = model;
  return max_relative_gradient_error(
      model.parameters(),
      [&](const Eigen::VectorXd& p, Eigen::VectorXd& g) {
        work.parameters() = p;
        return work.loss_and_gradient(inputs, targets, g);
      },
      [&](const Eigen::VectorXd& p) {
        work.parameters() = p;
        Eigen::VectorXd unused;
        return work.loss_and_gradient(inputs, targets, unused);
      },
      epsilon);
}

}  // namespace selnoise::models
