#include "racint/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "racint/error.hpp"

namespace racint {

namespace {

GaussHermiteRule build_rule(int order) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double off = std::sqrt(0.5 * k);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermiteRule rule;
  rule.nodes = eig.eigenvalues();
  rule.weights = std::sqrt(M_PI) * eig.eigenvectors().row(0).transpose().array().square();
  // Symmetrize: the rule is exactly symmetric, the eigensolver only nearly so.
  for (int k = 0; k < order / 2; ++k) {
    const int m = order - 1 - k;
    const double t = 0.5 * (rule.nodes[m] - rule.nodes[k]);
    const double w = 0.5 * (rule.weights[m] + rule.weights[k]);
    rule.nodes[k] = -t;
    rule.nodes[m] = t;
    rule.weights[k] = rule.weights[m] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  rule.log_weights_plain = rule.weights.array().log() + rule.nodes.array().square();
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int order) {
  require(order >= 1 && order <= 200, "Gauss-Hermite order must be in 1..200");
  static std::mutex mu;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
  return it->second;
}

}  // namespace racint
