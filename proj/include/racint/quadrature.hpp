#pragma once

#include <Eigen/Core>

namespace racint {

/// Gauss-Hermite rule for the weight exp(-t^2): sum_k w_k f(t_k) ~ int f(t) exp(-t^2) dt.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  /// log(w_k) + t_k^2, the log-weights for integrating f(t) without the
  /// exp(-t^2) factor.
  Eigen::VectorXd log_weights_plain;
};

/// Golub-Welsch construction; results are cached per order.
const GaussHermiteRule& gauss_hermite(int order);

}  // namespace racint
