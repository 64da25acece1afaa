#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace racint {

/// Objective value; fills `grad` when non-null.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

/// Value, gradient and Hessian in one call.
using SecondOrderObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad,
                                                  Eigen::MatrixXd* hess)>;

struct MinimizeOptions {
  double grad_tol = 1e-8;      // stop when |grad|_inf < grad_tol
  double rel_f_tol = 1e-12;    // or when the relative decrease falls below this
  double step_tol = 0.0;       // or when |step|_inf < step_tol (0 disables)
  int max_iter = 500;
  int max_backtracks = 60;
  double armijo = 1e-4;
  std::optional<Eigen::MatrixXd> initial_inverse_hessian;  // BFGS only
};

/// Defaults with the two stopping tolerances replaced.
inline MinimizeOptions with_tolerances(double grad_tol, double rel_f_tol) {
  MinimizeOptions o;
  o.grad_tol = grad_tol;
  o.rel_f_tol = rel_f_tol;
  return o;
}

struct MinimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::vector<double> trace;  // objective after each accepted step

  std::string summary() const;
};

/// BFGS with Armijo backtracking line search.
MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const MinimizeOptions& opt = {});

/// Damped Newton: step halving on non-decrease and a Levenberg shift whenever
/// the Hessian is not positive definite.
MinimizeResult minimize_newton(const SecondOrderObjective& f, Eigen::VectorXd x0,
                               const MinimizeOptions& opt = {});

/// Central-difference Jacobian of a gradient, symmetrized.
Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double h = 1e-5);

/// Central-difference gradient of the value.
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double h = 1e-5);

/// Inverse of a symmetric matrix that should be positive definite. Throws
/// singular-fit when it is not.
Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& m, const std::string& what);

}  // namespace racint
