#include "racint/optimize.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "racint/error.hpp"

namespace racint {

std::string MinimizeResult::summary() const {
  std::ostringstream os;
  os << "iterations=" << iterations << " f=" << f << " |grad|_inf="
     << (grad.size() ? grad.lpNorm<Eigen::Infinity>() : 0.0) << " stop=" << stop_reason;
  if (!trace.empty()) {
    os << " trace=[";
    const std::size_t from = trace.size() > 5 ? trace.size() - 5 : 0;
    for (std::size_t i = from; i < trace.size(); ++i) os << (i > from ? "," : "") << trace[i];
    os << "]";
  }
  return os.str();
}

namespace {

bool relative_stall(double f_old, double f_new, double tol) {
  return std::abs(f_old - f_new) <= tol * std::max(1.0, std::abs(f_old));
}

// Predicted decreases below this cannot be resolved in f (objectives are often
// differences of large sums); such steps are judged by the gradient instead.
double noise_level(double f) { return 1e-10 * std::max(1.0, std::abs(f)); }

bool accept_step(double f_old, double f_new, double predicted, double armijo,
                 const Eigen::VectorXd& g_old, const Eigen::VectorXd& g_new) {
  if (!std::isfinite(f_new)) return false;
  if (f_new <= f_old - armijo * predicted) return true;
  return predicted <= noise_level(f_old) && g_new.allFinite() &&
         g_new.squaredNorm() < g_old.squaredNorm();
}

}  // namespace

MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const MinimizeOptions& opt) {
  const Eigen::Index n = x0.size();
  MinimizeResult res;
  res.x = std::move(x0);
  res.grad.resize(n);
  res.f = f(res.x, &res.grad);
  if (!std::isfinite(res.f)) {
    res.stop_reason = "non-finite objective at start";
    return res;
  }
  Eigen::MatrixXd hinv = opt.initial_inverse_hessian.value_or(Eigen::MatrixXd::Identity(n, n));
  Eigen::VectorXd g_new(n);

  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    if (res.grad.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
      res.converged = true;
      res.stop_reason = "gradient";
      return res;
    }
    Eigen::VectorXd dir = -hinv * res.grad;
    double slope = res.grad.dot(dir);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      dir = -res.grad;
      slope = -res.grad.squaredNorm();
    }
    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      x_new = res.x + step * dir;
      f_new = f(x_new, &g_new);
      if (accept_step(res.f, f_new, -step * slope, opt.armijo, res.grad, g_new)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.stop_reason = "line search failed";
      // A failed search at a stationary point to working precision still
      // counts as converged.
      res.converged = res.grad.lpNorm<Eigen::Infinity>() < std::sqrt(opt.grad_tol) ||
                      -slope <= noise_level(res.f);
      return res;
    }
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - res.grad;
    const double sy = s.dot(y);
    const double f_old = res.f;
    res.x = x_new;
    res.f = f_new;
    res.grad = g_new;
    res.trace.push_back(res.f);

    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (res.iterations == 0 && !opt.initial_inverse_hessian) {
        hinv *= sy / y.squaredNorm();
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = hinv * y;
      hinv += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
              rho * (hy * s.transpose() + s * hy.transpose());
    }
    if (opt.step_tol > 0.0 && s.lpNorm<Eigen::Infinity>() < opt.step_tol) {
      res.converged = true;
      res.stop_reason = "step";
      return res;
    }
    if (relative_stall(f_old, res.f, opt.rel_f_tol)) {
      res.converged = true;
      res.stop_reason = "relative objective change";
      return res;
    }
  }
  res.converged = res.grad.lpNorm<Eigen::Infinity>() < opt.grad_tol;
  res.stop_reason = res.converged ? "gradient" : "max iterations";
  return res;
}

MinimizeResult minimize_newton(const SecondOrderObjective& f, Eigen::VectorXd x0,
                               const MinimizeOptions& opt) {
  const Eigen::Index n = x0.size();
  MinimizeResult res;
  res.x = std::move(x0);
  Eigen::MatrixXd hess(n, n);
  res.f = f(res.x, &res.grad, &hess);
  if (!std::isfinite(res.f)) {
    res.stop_reason = "non-finite objective at start";
    return res;
  }
  Eigen::VectorXd g_new(n);
  Eigen::MatrixXd h_new(n, n);

  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    if (res.grad.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
      res.converged = true;
      res.stop_reason = "gradient";
      return res;
    }
    // Levenberg shift until the (shifted) Hessian factors.
    double shift = 0.0;
    Eigen::VectorXd dir;
    const double scale = std::max(1e-12, hess.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::LLT<Eigen::MatrixXd> llt(hess + shift * Eigen::MatrixXd::Identity(n, n));
      if (llt.info() == Eigen::Success) {
        dir = -llt.solve(res.grad);
        if (dir.allFinite() && res.grad.dot(dir) < 0.0) break;
      }
      shift = shift == 0.0 ? 1e-8 * scale : shift * 10.0;
      dir.resize(0);
    }
    if (dir.size() == 0) dir = -res.grad;

    double step = 1.0;
    bool accepted = false;
    double f_new = 0.0;
    Eigen::VectorXd x_new;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      x_new = res.x + step * dir;
      f_new = f(x_new, &g_new, &h_new);
      if (accept_step(res.f, f_new, -step * res.grad.dot(dir), opt.armijo, res.grad, g_new)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Near the optimum rounding can prevent any decrease; accept when the
      // Newton decrement is already negligible.
      const double decrement = -res.grad.dot(dir);
      res.converged = decrement <= noise_level(res.f) ||
                      res.grad.lpNorm<Eigen::Infinity>() < std::sqrt(opt.grad_tol);
      res.stop_reason = "line search failed";
      return res;
    }
    const double f_old = res.f;
    const double step_norm = (x_new - res.x).lpNorm<Eigen::Infinity>();
    res.x = x_new;
    res.f = f_new;
    res.grad = g_new;
    hess = h_new;
    res.trace.push_back(res.f);
    if (opt.step_tol > 0.0 && step_norm < opt.step_tol) {
      res.converged = true;
      res.stop_reason = "step";
      return res;
    }
    if (opt.rel_f_tol > 0.0 && relative_stall(f_old, res.f, opt.rel_f_tol) &&
        res.grad.lpNorm<Eigen::Infinity>() < std::sqrt(opt.grad_tol)) {
      res.converged = true;
      res.stop_reason = "relative objective change";
      return res;
    }
  }
  res.converged = res.grad.lpNorm<Eigen::Infinity>() < opt.grad_tol;
  res.stop_reason = res.converged ? "gradient" : "max iterations";
  return res;
}

Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double h) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd hess(n, n);
  Eigen::VectorXd gp(n), gm(n);
  Eigen::VectorXd xp = x;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double hk = h * std::max(1.0, std::abs(x[k]));
    xp[k] = x[k] + hk;
    f(xp, &gp);
    xp[k] = x[k] - hk;
    f(xp, &gm);
    xp[k] = x[k];
    hess.col(k) = (gp - gm) / (2.0 * hk);
  }
  return 0.5 * (hess + hess.transpose());
}

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    xp[k] = x[k] + h;
    const double fp = f(xp, nullptr);
    xp[k] = x[k] - h;
    const double fm = f(xp, nullptr);
    xp[k] = x[k];
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& m, const std::string& what) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success || !llt.matrixLLT().allFinite()) {
    fail(ErrorKind::kSingularFit, what + ": information matrix is not positive definite");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

}  // namespace racint
