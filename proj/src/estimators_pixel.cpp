#include "racint/estimators_pixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/QR>

#include <unsupported/Eigen/SpecialFunctions>

#include "racint/error.hpp"
#include "racint/quadrature.hpp"

namespace racint {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// log(1 + e^x)
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::VectorXd linear_predictor(const Stratum& s, const Eigen::VectorXd& beta) {
  require(s.X.cols() == beta.size(), "stratum " + s.id + ": design width does not match beta");
  return s.X * beta + s.offset;
}

// Fits run in coordinates beta = T gamma where the stacked design X T has
// orthogonal columns of unit RMS; the truncated power basis is far too badly
// conditioned to optimize directly. R comes from a QR of the stacked design
// accumulated block by block.
struct Whitened {
  Eigen::MatrixXd T;
  std::vector<Stratum> strata;
};

Whitened whiten(std::span<const Stratum> strata, const std::string& what) {
  const Eigen::Index d = strata.front().X.cols();
  Eigen::MatrixXd r(0, d);
  double rows = 0.0;
  constexpr Eigen::Index kBlock = 4096;
  for (const auto& s : strata) {
    require(s.X.cols() == d, "stratum " + s.id + ": design width differs from the first stratum");
    for (Eigen::Index b = 0; b < s.rows(); b += kBlock) {
      const Eigen::Index len = std::min(kBlock, s.rows() - b);
      Eigen::MatrixXd stack(r.rows() + len, d);
      stack << r, s.X.middleRows(b, len);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(stack);
      const Eigen::Index k = std::min<Eigen::Index>(stack.rows(), d);
      r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    }
    rows += static_cast<double>(s.rows());
  }
  if (r.rows() < d) fail(ErrorKind::kSingularFit, what + ": fewer sampled units than parameters");
  const Eigen::VectorXd diag = r.diagonal().cwiseAbs();
  if (!(diag.minCoeff() > 1e-12 * diag.maxCoeff())) {
    fail(ErrorKind::kSingularFit, what + ": design matrix is rank deficient");
  }
  Whitened w;
  w.T = r.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(d, d) * std::sqrt(rows));
  w.strata.reserve(strata.size());
  for (const auto& s : strata) {
    Stratum t = s;
    t.X = s.X * w.T;
    w.strata.push_back(std::move(t));
  }
  return w;
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::kNaive: return "naive";
    case Method::kRandomEffects: return "random_effects";
    case Method::kCml: return "cml";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "naive") return Method::kNaive;
  if (s == "re" || s == "random_effects") return Method::kRandomEffects;
  if (s == "cml") return Method::kCml;
  fail(ErrorKind::kInvalidInput, "unknown method '" + s + "'");
}

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, "normal quantile: probability must be in (0, 1)");
  return Eigen::numext::ndtri(p);
}

double critical_value(double level) {
  require(level > 0.0 && level < 1.0, "confidence level must be in (0, 1)");
  return normal_quantile(0.5 + 0.5 * level);
}

// --- plain logistic --------------------------------------------------------

double logistic_loglik(std::span<const Stratum> strata, const Eigen::VectorXd& beta,
                       Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
  const Eigen::Index d = beta.size();
  if (grad) grad->setZero(d);
  if (hess) hess->setZero(d, d);
  double ll = 0.0;
  for (const auto& s : strata) {
    const Eigen::VectorXd eta = linear_predictor(s, beta);
    Eigen::VectorXd resid(eta.size()), w(eta.size());
    for (Eigen::Index k = 0; k < eta.size(); ++k) {
      ll += s.y[k] * eta[k] - softplus(eta[k]);
      const double p = sigmoid(eta[k]);
      resid[k] = s.y[k] - p;
      w[k] = p * (1.0 - p);
    }
    if (grad) *grad += s.X.transpose() * resid;
    if (hess) hess->noalias() -= s.X.transpose() * w.asDiagonal() * s.X;
  }
  return ll;
}

namespace {

LogisticFit fit_logistic_direct(std::span<const Stratum> strata, const MinimizeOptions& opt) {
  require(!strata.empty(), "logistic fit needs at least one stratum");
  const Eigen::Index d = strata.front().X.cols();
  auto f = [&](const Eigen::VectorXd& b, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
    const double ll = logistic_loglik(strata, b, g, h);
    if (g) *g = -*g;
    if (h) *h = -*h;
    return -ll;
  };
  MinimizeOptions o = opt;
  o.rel_f_tol = std::min(o.rel_f_tol, 1e-14);
  const MinimizeResult r = minimize_newton(f, Eigen::VectorXd::Zero(d), o);
  if (!r.converged) fail(ErrorKind::kConvergence, "logistic fit did not converge: " + r.summary());
  LogisticFit fit;
  fit.beta = r.x;
  fit.log_likelihood = -r.f;
  Eigen::MatrixXd h;
  Eigen::VectorXd g;
  logistic_loglik(strata, fit.beta, &g, &h);
  fit.information = -h;
  fit.iterations = r.iterations;
  return fit;
}

}  // namespace

LogisticFit fit_logistic(std::span<const Stratum> strata, const MinimizeOptions& opt) {
  require(!strata.empty(), "logistic fit needs at least one stratum");
  const Whitened w = whiten(strata, "logistic fit");
  LogisticFit fit = fit_logistic_direct(w.strata, opt);
  fit.beta = w.T * fit.beta;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  logistic_loglik(strata, fit.beta, &g, &h);
  fit.information = -h;
  return fit;
}

// --- random-intercept logistic --------------------------------------------

double re_cluster_loglik(const Stratum& s, const Eigen::VectorXd& beta, double theta, int order,
                         Eigen::VectorXd* grad_beta, double* grad_log_theta) {
  require(theta >= 0.0 && std::isfinite(theta), "random-effect SD must be finite and >= 0");
  const Eigen::VectorXd eta = linear_predictor(s, beta);
  const Eigen::Index rows = eta.size();

  if (theta == 0.0) {
    double ll = 0.0;
    Eigen::VectorXd resid(rows);
    for (Eigen::Index k = 0; k < rows; ++k) {
      ll += s.y[k] * eta[k] - softplus(eta[k]);
      resid[k] = s.y[k] - sigmoid(eta[k]);
    }
    if (grad_beta) *grad_beta = s.X.transpose() * resid;
    if (grad_log_theta) *grad_log_theta = 0.0;
    return ll;
  }

  const double inv_t2 = 1.0 / (theta * theta);
  const double ysum = s.y.sum();
  // Log of the integrand: the Bernoulli likelihood times the N(0, theta^2) density.
  auto h = [&](double a) {
    double v = ysum * a - 0.5 * a * a * inv_t2 - std::log(theta) -
               0.5 * std::log(2.0 * std::numbers::pi);
    for (Eigen::Index k = 0; k < rows; ++k) v += s.y[k] * eta[k] - softplus(eta[k] + a);
    return v;
  };
  auto dh = [&](double a, double* d2) {
    double d1 = ysum - a * inv_t2;
    double c = -inv_t2;
    for (Eigen::Index k = 0; k < rows; ++k) {
      const double p = sigmoid(eta[k] + a);
      d1 -= p;
      c -= p * (1.0 - p);
    }
    if (d2) *d2 = c;
    return d1;
  };

  // h is strictly concave; safeguarded Newton for its mode inside a bracket.
  double lo = -1.0, hi = 1.0;
  while (dh(lo, nullptr) < 0.0) lo *= 2.0;
  while (dh(hi, nullptr) > 0.0) hi *= 2.0;
  double a = 0.0, d2 = -inv_t2;
  for (int it = 0; it < 200; ++it) {
    const double d1 = dh(a, &d2);
    if (d1 > 0.0) lo = a; else hi = a;
    double next = a - d1 / d2;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - a) <= 1e-12 * std::max(1.0, std::abs(a))) {
      a = next;
      break;
    }
    a = next;
  }
  dh(a, &d2);
  const double scale = 1.0 / std::sqrt(-d2);

  const GaussHermiteRule& rule = gauss_hermite(order);
  const Eigen::Index q = rule.nodes.size();
  Eigen::VectorXd nodes(q), logv(q);
  double lse = kNegInf;
  for (Eigen::Index k = 0; k < q; ++k) {
    nodes[k] = a + std::numbers::sqrt2 * scale * rule.nodes[k];
    logv[k] = rule.log_weights_plain[k] + h(nodes[k]);
    lse = log_add(lse, logv[k]);
  }
  const double ll = std::log(std::numbers::sqrt2 * scale) + lse;

  if (grad_beta || grad_log_theta) {
    Eigen::VectorXd resid = Eigen::VectorXd::Zero(rows);
    double glt = 0.0;
    for (Eigen::Index k = 0; k < q; ++k) {
      const double w = std::exp(logv[k] - lse);
      if (w == 0.0) continue;
      for (Eigen::Index r = 0; r < rows; ++r) resid[r] += w * (s.y[r] - sigmoid(eta[r] + nodes[k]));
      glt += w * (nodes[k] * nodes[k] * inv_t2 - 1.0);
    }
    if (grad_beta) *grad_beta = s.X.transpose() * resid;
    if (grad_log_theta) *grad_log_theta = glt;
  }
  return ll;
}

double re_marginal_loglik(std::span<const Stratum> strata, const Eigen::VectorXd& params,
                          int order, Eigen::VectorXd* grad) {
  const Eigen::Index d = params.size() - 1;
  const Eigen::VectorXd beta = params.head(d);
  const double theta = std::exp(params[d]);
  if (grad) grad->setZero(params.size());
  double ll = 0.0;
  Eigen::VectorXd gb;
  double gt = 0.0;
  for (const auto& s : strata) {
    ll += re_cluster_loglik(s, beta, theta, order, grad ? &gb : nullptr, grad ? &gt : nullptr);
    if (grad) {
      grad->head(d) += gb;
      (*grad)[d] += gt;
    }
  }
  return ll;
}

namespace {

GlmmFit fit_glmm_direct(std::span<const Stratum> strata, const GlmmOptions& opt) {
  require(!strata.empty(), "random-effects fit needs at least one cluster");
  require(opt.quadrature_order >= 1, "quadrature order must be positive");
  const Eigen::Index d = strata.front().X.cols();
  const int order = opt.quadrature_order;
  GlmmFit fit;

  const LogisticFit start = fit_logistic_direct(strata, opt.optim);
  {
    Eigen::VectorXd p0 = Eigen::VectorXd::Zero(d + 1);
    p0[d] = std::log(opt.initial_theta);
    fit.initial_log_likelihood = re_marginal_loglik(strata, p0, order, nullptr);
  }

  if (opt.fixed_theta) {
    const double theta = *opt.fixed_theta;
    require(theta >= 0.0, "fixed random-effect SD must be >= 0");
    fit.theta = theta;
    auto f = [&](const Eigen::VectorXd& b, Eigen::VectorXd* g) {
      double gt = 0.0;
      Eigen::VectorXd gb;
      double ll = 0.0;
      if (g) g->setZero(d);
      for (const auto& s : strata) {
        ll += re_cluster_loglik(s, b, theta, order, g ? &gb : nullptr, g ? &gt : nullptr);
        if (g) *g += gb;
      }
      if (g) *g = -*g;
      return -ll;
    };
    if (theta == 0.0) {
      fit.beta = start.beta;
      fit.log_likelihood = start.log_likelihood;
      fit.iterations = start.iterations;
      if (opt.compute_covariance) fit.covariance = inverse_spd(start.information, "logistic fit");
      return fit;
    }
    MinimizeOptions o = opt.optim;
    o.initial_inverse_hessian = inverse_spd(start.information, "logistic start");
    const MinimizeResult r =
        minimize_bfgs(f, opt.init_from_logistic ? start.beta : Eigen::VectorXd::Zero(d), o);
    if (!r.converged) {
      fail(ErrorKind::kConvergence, "random-effects fit did not converge: " + r.summary());
    }
    fit.beta = r.x;
    fit.log_likelihood = -r.f;
    fit.iterations = r.iterations;
    if (opt.compute_covariance) {
      fit.covariance = inverse_spd(numeric_hessian(f, r.x), "random-effects fit");
    }
    return fit;
  }

  require(opt.initial_theta > 0.0, "initial random-effect SD must be positive");
  auto f = [&](const Eigen::VectorXd& p, Eigen::VectorXd* g) {
    const double ll = re_marginal_loglik(strata, p, order, g);
    if (g) *g = -*g;
    return -ll;
  };
  Eigen::VectorXd x0(d + 1);
  x0.head(d) = opt.init_from_logistic ? start.beta : Eigen::VectorXd::Zero(d);
  x0[d] = std::log(opt.initial_theta);
  MinimizeOptions o = opt.optim;
  if (!o.initial_inverse_hessian) {
    Eigen::MatrixXd h0 = Eigen::MatrixXd::Zero(d + 1, d + 1);
    h0.topLeftCorner(d, d) = inverse_spd(start.information, "logistic start");
    h0(d, d) = 2.0 / static_cast<double>(strata.size());
    o.initial_inverse_hessian = h0;
  }
  const MinimizeResult r = minimize_bfgs(f, x0, o);
  if (!r.converged) {
    fail(ErrorKind::kConvergence, "random-effects fit did not converge: " + r.summary());
  }
  fit.beta = r.x.head(d);
  fit.theta = std::exp(r.x[d]);
  fit.log_likelihood = -r.f;
  fit.iterations = r.iterations;

  if (opt.compute_covariance) {
    if (fit.theta < 1e-4) {
      fit.warnings.push_back("random-effect SD at the boundary (theta < 1e-4); covariance of beta "
                             "only, computed with theta held fixed");
      const double theta = fit.theta;
      auto fb = [&](const Eigen::VectorXd& b, Eigen::VectorXd* g) {
        Eigen::VectorXd p(d + 1);
        p.head(d) = b;
        p[d] = std::log(theta);
        Eigen::VectorXd gp;
        const double v = f(p, g ? &gp : nullptr);
        if (g) *g = gp.head(d);
        return v;
      };
      fit.covariance = inverse_spd(numeric_hessian(fb, fit.beta), "random-effects fit");
    } else {
      fit.covariance = inverse_spd(numeric_hessian(f, r.x), "random-effects fit");
    }
  }
  return fit;
}

}  // namespace

GlmmFit fit_glmm(std::span<const Stratum> strata, const GlmmOptions& opt) {
  require(!strata.empty(), "random-effects fit needs at least one cluster");
  const Whitened w = whiten(strata, "random-effects fit");
  GlmmOptions o = opt;
  o.optim.initial_inverse_hessian.reset();
  GlmmFit fit = fit_glmm_direct(w.strata, o);
  const Eigen::Index d = w.T.rows();
  fit.beta = w.T * fit.beta;
  if (fit.covariance) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(fit.covariance->rows(), fit.covariance->rows());
    t.topLeftCorner(d, d) = w.T;
    fit.covariance = t * *fit.covariance * t.transpose();
  }
  return fit;
}

// --- conditional logistic -------------------------------------------------

namespace {

// table(j, k) = log e_k(exp(eta_0..eta_{j-1})), j = 0..B, k = 0..n.
Eigen::MatrixXd forward_esp(const Eigen::VectorXd& eta, int n) {
  const Eigen::Index b = eta.size();
  Eigen::MatrixXd t = Eigen::MatrixXd::Constant(b + 1, n + 1, kNegInf);
  t(0, 0) = 0.0;
  for (Eigen::Index j = 1; j <= b; ++j) {
    t(j, 0) = 0.0;
    for (int k = 1; k <= n; ++k) t(j, k) = log_add(t(j - 1, k), t(j - 1, k - 1) + eta[j - 1]);
  }
  return t;
}

// table(j, k) = log e_k(exp(eta_j..eta_{B-1})), j = 0..B.
Eigen::MatrixXd backward_esp(const Eigen::VectorXd& eta, int n) {
  const Eigen::Index b = eta.size();
  Eigen::MatrixXd t = Eigen::MatrixXd::Constant(b + 1, n + 1, kNegInf);
  t(b, 0) = 0.0;
  for (Eigen::Index j = b - 1; j >= 0; --j) {
    t(j, 0) = 0.0;
    for (int k = 1; k <= n; ++k) t(j, k) = log_add(t(j + 1, k), t(j + 1, k - 1) + eta[j]);
  }
  return t;
}

void check_draws(const Eigen::VectorXd& eta, int n) {
  require(n >= 0 && n <= eta.size(), "number of draws must be in [0, size]");
}

}  // namespace

double log_esp(const Eigen::VectorXd& eta, int n) {
  check_draws(eta, n);
  Eigen::VectorXd e = Eigen::VectorXd::Constant(n + 1, kNegInf);
  e[0] = 0.0;
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    for (int k = std::min<int>(n, static_cast<int>(j) + 1); k >= 1; --k) {
      e[k] = log_add(e[k], e[k - 1] + eta[j]);
    }
  }
  return e[n];
}

Eigen::VectorXd inclusion_probabilities(const Eigen::VectorXd& eta, int n,
                                        double* log_denominator) {
  check_draws(eta, n);
  const Eigen::Index b = eta.size();
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(b);
  const Eigen::MatrixXd fw = forward_esp(eta, n);
  const double logden = fw(b, n);
  if (log_denominator) *log_denominator = logden;
  if (n == 0) return pi;
  if (n == b) return Eigen::VectorXd::Ones(b);
  const Eigen::MatrixXd bw = backward_esp(eta, n);
  for (Eigen::Index j = 0; j < b; ++j) {
    double acc = kNegInf;
    for (int k = 0; k <= n - 1; ++k) acc = log_add(acc, fw(j, k) + bw(j + 1, n - 1 - k));
    pi[j] = std::min(1.0, std::exp(eta[j] + acc - logden));
  }
  return pi;
}

Eigen::MatrixXd inclusion_covariance(const Eigen::VectorXd& eta, int n) {
  check_draws(eta, n);
  const Eigen::Index b = eta.size();
  const Eigen::VectorXd pi = inclusion_probabilities(eta, n);
  Eigen::MatrixXd joint = pi.asDiagonal();
  if (n >= 2 && n < b) {
    Eigen::VectorXd rest(b - 1);
    for (Eigen::Index l = 0; l < b; ++l) {
      for (Eigen::Index j = 0, k = 0; j < b; ++j) {
        if (j != l) rest[k++] = eta[j];
      }
      // Conditional on l being drawn, the other n - 1 come from the rest.
      const Eigen::VectorXd cond = inclusion_probabilities(rest, n - 1);
      for (Eigen::Index j = 0, k = 0; j < b; ++j) {
        if (j != l) joint(j, l) = pi[l] * cond[k++];
      }
    }
    joint = 0.5 * (joint + joint.transpose()).eval();
  } else if (n == b) {
    joint.setOnes();
  }
  return joint - pi * pi.transpose();
}

namespace {

// Mean and covariance of sum_{j in u} x_j over the conditional design, carried
// through the subset-sum recursion as ratios to e_k: cost O(B n d^2) instead
// of the O(B^2 n) inclusion covariance. Pays off when d^2 < B.
void esp_moments(const Eigen::MatrixXd& x, const Eigen::VectorXd& eta, int n, double& logden,
                 Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
  const Eigen::Index b = eta.size(), d = x.cols();
  std::vector<double> le(static_cast<std::size_t>(n) + 1, kNegInf);
  std::vector<Eigen::VectorXd> g(static_cast<std::size_t>(n) + 1, Eigen::VectorXd::Zero(d));
  std::vector<Eigen::MatrixXd> h(static_cast<std::size_t>(n) + 1, Eigen::MatrixXd::Zero(d, d));
  le[0] = 0.0;
  for (Eigen::Index j = 0; j < b; ++j) {
    const Eigen::VectorXd xj = x.row(j).transpose();
    for (int k = static_cast<int>(std::min<Eigen::Index>(j + 1, n)); k >= 1; --k) {
      const auto ku = static_cast<std::size_t>(k);
      const double la = le[ku];
      const double lb = eta[j] + le[ku - 1];
      if (lb == kNegInf) continue;
      const double t = log_add(la, lb);
      const double alpha = la == kNegInf ? 0.0 : std::exp(la - t);
      const Eigen::VectorXd gb = g[ku - 1] + xj;
      h[ku] = alpha * h[ku] + (1.0 - alpha) * (h[ku - 1] + xj * g[ku - 1].transpose() +
                                               g[ku - 1] * xj.transpose() + xj * xj.transpose());
      g[ku] = alpha * g[ku] + (1.0 - alpha) * gb;
      le[ku] = t;
    }
  }
  const auto nu = static_cast<std::size_t>(n);
  logden = le[nu];
  mean = g[nu];
  cov = h[nu] - mean * mean.transpose();
}

}  // namespace

double clogit_loglik(std::span<const Stratum> strata, const Eigen::VectorXd& beta,
                     Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
  const Eigen::Index d = beta.size();
  if (grad) grad->setZero(d);
  if (hess) hess->setZero(d, d);
  double ll = 0.0;
  for (const auto& s : strata) {
    const int n = static_cast<int>(std::lround(s.cases()));
    if (n == 0 || n == s.rows()) continue;
    const Eigen::VectorXd eta = linear_predictor(s, beta);
    double logden = 0.0;
    if (hess && d * d < s.rows()) {
      Eigen::VectorXd mean;
      Eigen::MatrixXd cov;
      esp_moments(s.X, eta, n, logden, mean, cov);
      ll += s.y.dot(eta) - logden;
      if (grad) *grad += s.X.transpose() * s.y - mean;
      *hess -= cov;
      continue;
    }
    const Eigen::VectorXd pi = inclusion_probabilities(eta, n, &logden);
    ll += s.y.dot(eta) - logden;
    if (grad) *grad += s.X.transpose() * (s.y - pi);
    if (hess) hess->noalias() -= s.X.transpose() * inclusion_covariance(eta, n) * s.X;
  }
  return ll;
}

std::vector<Stratum> informative_strata(std::span<const Stratum> strata,
                                        std::vector<std::string>& warnings) {
  std::vector<Stratum> out;
  for (const auto& s : strata) {
    const double n = s.cases();
    if (n == 0.0 || n == static_cast<double>(s.rows())) {
      warnings.push_back("stratum " + s.id + " dropped: " +
                         (n == 0.0 ? "no cases" : "no controls") +
                         " (no conditional information)");
      continue;
    }
    out.push_back(s);
  }
  return out;
}

namespace {

ClogitFit fit_clogit_direct(std::span<const Stratum> strata, const ClogitOptions& opt) {
  require(!strata.empty(), "conditional fit needs at least one stratum");
  ClogitFit fit;
  const std::vector<Stratum> used = informative_strata(strata, fit.warnings);
  if (used.empty()) fail(ErrorKind::kInvalidInput, "no stratum has both cases and controls");
  fit.strata_used = static_cast<int>(used.size());
  const Eigen::Index d = used.front().X.cols();
  auto f = [&](const Eigen::VectorXd& b, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
    const double ll = clogit_loglik(used, b, g, h);
    if (g) *g = -*g;
    if (h) *h = -*h;
    return -ll;
  };
  const MinimizeResult r = minimize_newton(f, Eigen::VectorXd::Zero(d), opt.optim);
  if (!r.converged) {
    fail(ErrorKind::kConvergence, "conditional fit did not converge: " + r.summary());
  }
  fit.beta = r.x;
  fit.log_likelihood = -r.f;
  fit.score = -r.grad;
  fit.iterations = r.iterations;
  if (opt.compute_covariance) {
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    clogit_loglik(used, fit.beta, &g, &h);
    fit.covariance = inverse_spd(-h, "conditional fit");
  }
  return fit;
}

}  // namespace

ClogitFit fit_clogit(std::span<const Stratum> strata, const ClogitOptions& opt) {
  require(!strata.empty(), "conditional fit needs at least one stratum");
  std::vector<std::string> warnings;
  const std::vector<Stratum> used = informative_strata(strata, warnings);
  if (used.empty()) fail(ErrorKind::kInvalidInput, "no stratum has both cases and controls");
  const Whitened w = whiten(used, "conditional fit");
  ClogitFit fit = fit_clogit_direct(w.strata, opt);
  fit.warnings = std::move(warnings);
  fit.beta = w.T * fit.beta;
  clogit_loglik(used, fit.beta, &fit.score, nullptr);
  if (opt.compute_covariance) fit.covariance = w.T * fit.covariance * w.T.transpose();
  return fit;
}

// --- pixel estimators -----------------------------------------------------

PixelFit naive_pixel(std::span<const StandardShoe> shoes) {
  require(!shoes.empty(), "naive estimator needs at least one shoe");
  const GridDims grid = shoes.front().dims();
  Eigen::MatrixXd n_sum = Eigen::MatrixXd::Zero(grid.height, grid.width);
  Eigen::MatrixXd s_sum = Eigen::MatrixXd::Zero(grid.height, grid.width);
  for (const auto& s : shoes) {
    validate(s);
    if (!(s.dims() == grid)) fail(ErrorKind::kInvalidInput, "shoe " + s.shoe_id + ": grid mismatch");
    n_sum += s.n.cast<double>();
    s_sum += s.S.cast<double>();
  }
  PixelFit fit;
  fit.method = Method::kNaive;
  fit.grid = grid;
  fit.lambda_hat = Eigen::MatrixXd::Constant(grid.height, grid.width, kNaN);
  for (Eigen::Index k = 0; k < n_sum.size(); ++k) {
    if (s_sum(k) > 0.0) fit.lambda_hat(k) = n_sum(k) / s_sum(k);
  }

  // Moment estimate of Var(a) from U_i = (N_i^2 - N_i) / (sum_j lambda_j S_ij)^2.
  double u_sum = 0.0;
  int used = 0;
  for (const auto& s : shoes) {
    double mu = 0.0;
    for (Eigen::Index k = 0; k < s.S.size(); ++k) {
      if (s.S(k)) mu += fit.lambda_hat(k);
    }
    if (mu <= 0.0) continue;
    const double ni = static_cast<double>(s.total_racs());
    u_sum += (ni * ni - ni) / (mu * mu);
    ++used;
  }
  double var_a = used > 0 ? u_sum / used - 1.0 : 0.0;
  if (var_a < 0.0) {
    fit.warnings.push_back("moment estimate of Var(a) was negative and is clamped to 0");
    var_a = 0.0;
  }
  fit.var_a_hat = var_a;
  Eigen::MatrixXd var = Eigen::MatrixXd::Constant(grid.height, grid.width, kNaN);
  for (Eigen::Index k = 0; k < var.size(); ++k) {
    if (s_sum(k) > 0.0) {
      const double l = fit.lambda_hat(k);
      var(k) = (l * l * var_a + l) / s_sum(k);
    }
  }
  fit.lambda_var = std::move(var);
  return fit;
}

Eigen::MatrixXd kernel_smooth(const Eigen::MatrixXd& lambda, int half_width) {
  require(half_width >= 0, "smoothing half-width must be >= 0");
  const Eigen::Index rows = lambda.rows(), cols = lambda.cols();
  // Summed-area tables of defined values and of the defined-entry indicator.
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(rows + 1, cols + 1);
  Eigen::MatrixXd cnt = Eigen::MatrixXd::Zero(rows + 1, cols + 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double v = lambda(r, c);
      const bool ok = std::isfinite(v);
      sum(r + 1, c + 1) = (ok ? v : 0.0) + sum(r, c + 1) + sum(r + 1, c) - sum(r, c);
      cnt(r + 1, c + 1) = (ok ? 1.0 : 0.0) + cnt(r, c + 1) + cnt(r + 1, c) - cnt(r, c);
    }
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(rows, cols, kNaN);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index r0 = std::max<Eigen::Index>(0, r - half_width);
    const Eigen::Index r1 = std::min<Eigen::Index>(rows, r + half_width + 1);
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!std::isfinite(lambda(r, c))) continue;
      const Eigen::Index c0 = std::max<Eigen::Index>(0, c - half_width);
      const Eigen::Index c1 = std::min<Eigen::Index>(cols, c + half_width + 1);
      const double s = sum(r1, c1) - sum(r0, c1) - sum(r1, c0) + sum(r0, c0);
      const double n = cnt(r1, c1) - cnt(r0, c1) - cnt(r1, c0) + cnt(r0, c0);
      out(r, c) = s / n;
    }
  }
  return out;
}

Eigen::MatrixXd spline_surface(const SplineSpec& spec, GridDims grid) {
  validate(spec);
  // The design row factors as bx (x) by, so g = bx^T B by with B the
  // coefficient vector reshaped x-major.
  const Eigen::Index dy = spec.basis_dim_y();
  const Eigen::Map<const Eigen::MatrixXd> coef(spec.beta.data(), dy, spec.basis_dim_x());
  Eigen::MatrixXd by(dy, grid.height);
  for (int r = 0; r < grid.height; ++r) {
    by.col(r) = basis_1d<double>((r + 0.5) / grid.height, spec.knots_y);
  }
  Eigen::MatrixXd bx(spec.basis_dim_x(), grid.width);
  for (int c = 0; c < grid.width; ++c) {
    bx.col(c) = basis_1d<double>((c + 0.5) / grid.width, spec.knots_x);
  }
  const Eigen::MatrixXd g = by.transpose() * coef * bx;
  return g.array().exp().matrix();
}

namespace {

std::vector<Stratum> sampled_strata(const Subsample& sample, GridDims grid,
                                    const Eigen::VectorXd& kx, const Eigen::VectorXd& ky,
                                    bool drop_intercept, std::vector<std::string>& warnings) {
  require(sample.meta.rho1.size() == sample.clusters.size(),
          "sampling metadata does not match the clusters");
  const std::vector<double> off = offsets(sample.meta);
  std::vector<ClusterSample> keep;
  std::vector<double> keep_off;
  for (std::size_t i = 0; i < sample.clusters.size(); ++i) {
    const auto& c = sample.clusters[i];
    if (c.size() == 0) continue;
    if (!std::isfinite(off[i])) {
      warnings.push_back("cluster " + c.id + " skipped: infinite sampling offset");
      continue;
    }
    for (int u : c.unit) {
      if (u < 0 || u >= grid.size()) {
        fail(ErrorKind::kOutOfDomain, "cluster " + c.id + ": pixel index outside the grid");
      }
    }
    keep.push_back(c);
    keep_off.push_back(off[i]);
  }
  if (keep.empty()) fail(ErrorKind::kInvalidInput, "no usable clusters in the sample");
  const Eigen::Index d = (4 + kx.size()) * (4 + ky.size()) - (drop_intercept ? 1 : 0);
  return build_strata(keep, keep_off, d, spline_design(grid, kx, ky, drop_intercept));
}

}  // namespace

PixelFit fit_re_pixel(const Subsample& sample, GridDims grid, const Eigen::VectorXd& knots_x,
                      const Eigen::VectorXd& knots_y, const GlmmOptions& opt) {
  PixelFit fit;
  fit.method = Method::kRandomEffects;
  fit.grid = grid;
  fit.sample_meta = sample.meta;
  const auto strata = sampled_strata(sample, grid, knots_x, knots_y, false, fit.warnings);
  GlmmFit g = fit_glmm(strata, opt);
  SplineSpec spec;
  spec.knots_x = knots_x;
  spec.knots_y = knots_y;
  spec.beta = g.beta;
  fit.spline = spec;
  fit.lambda_hat = spline_surface(spec, grid);
  fit.sigma_hat = g.theta;
  if (g.covariance) {
    const Eigen::Index d = g.beta.size();
    fit.covariance = g.covariance->topLeftCorner(d, d);
  }
  fit.log_likelihood = g.log_likelihood;
  fit.iterations = g.iterations;
  fit.warnings.insert(fit.warnings.end(), g.warnings.begin(), g.warnings.end());
  return fit;
}

PixelFit fit_cml_pixel(const Subsample& sample, GridDims grid, const Eigen::VectorXd& knots_x,
                       const Eigen::VectorXd& knots_y, const ClogitOptions& opt) {
  PixelFit fit;
  fit.method = Method::kCml;
  fit.grid = grid;
  fit.sample_meta = sample.meta;
  const auto strata = sampled_strata(sample, grid, knots_x, knots_y, true, fit.warnings);
  ClogitFit c = fit_clogit(strata, opt);
  SplineSpec spec;
  spec.knots_x = knots_x;
  spec.knots_y = knots_y;
  spec.intercept_identified = false;
  spec.beta = Eigen::VectorXd::Zero(c.beta.size() + 1);
  spec.beta.tail(c.beta.size()) = c.beta;
  fit.spline = spec;
  fit.lambda_hat = spline_surface(spec, grid);
  if (opt.compute_covariance) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(spec.beta.size(), spec.beta.size());
    cov.bottomRightCorner(c.beta.size(), c.beta.size()) = c.covariance;
    fit.covariance = std::move(cov);
  }
  fit.log_likelihood = c.log_likelihood;
  fit.iterations = c.iterations;
  fit.warnings.insert(fit.warnings.end(), c.warnings.begin(), c.warnings.end());
  return fit;
}

void rescale_to_reference(PixelFit& fit, const PixelFit& reference) {
  if (!(fit.grid == reference.grid)) {
    fail(ErrorKind::kInvalidInput, "rescaling: grids differ");
  }
  double fs = 0.0, rs = 0.0;
  long n = 0;
  for (Eigen::Index k = 0; k < reference.lambda_hat.size(); ++k) {
    const double r = reference.lambda_hat(k);
    const double v = fit.lambda_hat(k);
    if (!std::isfinite(r) || !std::isfinite(v)) continue;
    rs += r;
    fs += v;
    ++n;
  }
  if (n == 0 || fs <= 0.0 || rs <= 0.0) {
    fail(ErrorKind::kInvalidInput, "rescaling: zero mean in the fit or the reference");
  }
  const double c = rs / fs;
  fit.lambda_hat *= c;
  fit.rescale_constant = fit.rescale_constant.value_or(1.0) * c;
}

std::vector<Interval> pointwise_ci(const PixelFit& fit, double level,
                                   std::span<const std::pair<int, int>> at) {
  const double z = critical_value(level);
  std::vector<Interval> out;
  out.reserve(at.size());
  for (const auto& [r, c] : at) {
    if (r < 0 || r >= fit.grid.height || c < 0 || c >= fit.grid.width) {
      fail(ErrorKind::kOutOfDomain,
           "pixel (" + std::to_string(r) + "," + std::to_string(c) + ") outside the grid");
    }
    if (fit.spline) {
      if (!fit.covariance) fail(ErrorKind::kInvalidState, "fit has no coefficient covariance");
      const Point u = unit_coords(fit.grid, r, c);
      const Eigen::VectorXd x = design_row(*fit.spline, u.x(), u.y());
      const double g = x.dot(fit.spline->beta);
      const double se = std::sqrt(std::max(0.0, x.dot(*fit.covariance * x)));
      const double k = fit.rescale_constant.value_or(1.0);
      out.push_back({k * std::exp(g - z * se), k * std::exp(g + z * se)});
    } else {
      if (!fit.lambda_var) fail(ErrorKind::kInvalidState, "fit has no variance information");
      const double l = fit.lambda_hat(r, c);
      const double v = (*fit.lambda_var)(r, c);
      if (!std::isfinite(l) || !std::isfinite(v)) {
        out.push_back({kNaN, kNaN});
        continue;
      }
      const double se = std::sqrt(std::max(0.0, v));
      out.push_back({std::max(0.0, l - z * se), l + z * se});
    }
  }
  return out;
}

}  // namespace racint
