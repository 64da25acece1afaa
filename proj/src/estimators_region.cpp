#include "racint/estimators_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "racint/error.hpp"
#include "racint/quadrature.hpp"

namespace racint {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Totals {
  Eigen::VectorXd n;  // n.j
  Eigen::VectorXd s;  // S.j
  Eigen::VectorXi touched;  // |m_j|
};

Totals totals(std::span<const ShoeRecord> shoes, Eigen::Index j) {
  Totals t{Eigen::VectorXd::Zero(j), Eigen::VectorXd::Zero(j), Eigen::VectorXi::Zero(j)};
  for (const auto& r : shoes) {
    t.n += r.counts.cast<double>();
    t.s += r.s_area;
    for (Eigen::Index k = 0; k < j; ++k) t.touched[k] += r.s_area[k] > 0.0;
  }
  return t;
}

// sum_j [n_ij log(lambda_j S_ij) - lgamma(n_ij + 1)] over cells with counts.
double poisson_constant(const ShoeRecord& rec, const Eigen::VectorXd& lambda) {
  double c = 0.0;
  for (Eigen::Index k = 0; k < rec.cells(); ++k) {
    const int n = rec.counts[k];
    if (n == 0) continue;
    c += n * std::log(lambda[k] * rec.s_area[k]) - std::lgamma(n + 1.0);
  }
  return c;
}

// Expected count of a shoe, skipping undefined regions.
double expected_total(const ShoeRecord& rec, const Eigen::VectorXd& lambda) {
  double mu = 0.0;
  for (Eigen::Index k = 0; k < rec.cells(); ++k) {
    if (rec.s_area[k] > 0.0 && std::isfinite(lambda[k])) mu += lambda[k] * rec.s_area[k];
  }
  return mu;
}

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

}  // namespace

const char* to_string(Prior p) { return p == Prior::kGamma ? "gamma" : "lognormal"; }

Prior prior_from_string(const std::string& s) {
  if (s == "gamma") return Prior::kGamma;
  if (s == "lognormal") return Prior::kLognormal;
  fail(ErrorKind::kInvalidInput, "unknown random-effect prior '" + s + "'");
}

Eigen::Index check_records(std::span<const ShoeRecord> shoes) {
  require(!shoes.empty(), "at least one shoe record is required");
  const Eigen::Index j = shoes.front().cells();
  require(j >= 1, "records must have at least one cell");
  for (const auto& r : shoes) {
    validate(r);
    if (r.cells() != j) {
      fail(ErrorKind::kInvalidInput, "shoe " + r.shoe_id + " has a different number of cells");
    }
  }
  return j;
}

// --- naive ------------------------------------------------------------------

double estimate_var_a(std::span<const ShoeRecord> shoes, const Eigen::VectorXd& lambda) {
  double u = 0.0;
  int m = 0;
  for (const auto& r : shoes) {
    const double mu = expected_total(r, lambda);
    if (mu <= 0.0) continue;
    const double n = static_cast<double>(r.total);
    u += (n * n - n) / (mu * mu);
    ++m;
  }
  return m > 0 ? u / m - 1.0 : 0.0;
}

NaiveVariance var_naive(std::span<const ShoeRecord> shoes, const Eigen::VectorXd& lambda) {
  const Eigen::Index j = check_records(shoes);
  require(lambda.size() == j, "lambda length does not match the records");
  NaiveVariance out;
  out.var_a_raw = estimate_var_a(shoes, lambda);
  out.clamped = out.var_a_raw < 0.0;
  out.var_a = std::max(0.0, out.var_a_raw);
  Eigen::VectorXd inv_s = Eigen::VectorXd::Zero(j);
  Eigen::VectorXd touched = Eigen::VectorXd::Zero(j);
  for (const auto& r : shoes) {
    for (Eigen::Index k = 0; k < j; ++k) {
      if (r.s_area[k] > 0.0) {
        inv_s[k] += 1.0 / r.s_area[k];
        touched[k] += 1.0;
      }
    }
  }
  out.var.resize(j);
  for (Eigen::Index k = 0; k < j; ++k) {
    const double m = touched[k];
    const double l = lambda[k];
    out.var[k] = m > 0.0 && std::isfinite(l) ? l * l * out.var_a / m + l * inv_s[k] / (m * m) : kNaN;
  }
  return out;
}

RegionFit naive_region(std::span<const ShoeRecord> shoes) {
  const Eigen::Index j = check_records(shoes);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(j);
  Eigen::VectorXd touched = Eigen::VectorXd::Zero(j);
  for (const auto& r : shoes) {
    for (Eigen::Index k = 0; k < j; ++k) {
      if (r.s_area[k] > 0.0) {
        sum[k] += r.counts[k] / r.s_area[k];
        touched[k] += 1.0;
      }
    }
  }
  RegionFit fit;
  fit.method = Method::kNaive;
  fit.lambda_hat.resize(j);
  fit.at_boundary.assign(static_cast<std::size_t>(j), 0);
  for (Eigen::Index k = 0; k < j; ++k) {
    fit.lambda_hat[k] = touched[k] > 0.0 ? sum[k] / touched[k] : kNaN;
    if (touched[k] == 0.0) {
      fit.warnings.push_back("region " + std::to_string(k) + " undefined: no shoe touches it");
    } else if (fit.lambda_hat[k] == 0.0) {
      fit.at_boundary[static_cast<std::size_t>(k)] = 1;
    }
  }
  const NaiveVariance v = var_naive(shoes, fit.lambda_hat);
  if (v.clamped) fit.warnings.push_back("moment estimate of Var(a) was negative and is clamped to 0");
  fit.lambda_var = v.var;
  fit.var_a_hat = v.var_a;
  return fit;
}

// --- random effects -----------------------------------------------------------

double poisson_shoe_loglik(const ShoeRecord& rec, const Eigen::VectorXd& lambda, double a) {
  const double mu = expected_total(rec, lambda);
  return poisson_constant(rec, lambda) + rec.total * std::log(a) - a * mu;
}

double gamma_shoe_loglik(const ShoeRecord& rec, const Eigen::VectorXd& lambda, double var_a,
                         Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
  require(var_a > 0.0, "gamma random effect needs Var(a) > 0");
  const Eigen::Index j = rec.cells();
  const double g = 1.0 / var_a;
  const long n = rec.total;
  Eigen::VectorXd s(j);
  for (Eigen::Index k = 0; k < j; ++k) s[k] = rec.s_area[k] > 0.0 ? lambda[k] * rec.s_area[k] : 0.0;
  const double mu = s.sum();

  // sum_{k<n} log(g + k) and its first two derivatives in g.
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;
  for (long k = 0; k < n; ++k) {
    const double t = g + static_cast<double>(k);
    a0 += std::log(t);
    a1 += 1.0 / t;
    a2 -= 1.0 / (t * t);
  }
  const double ll = poisson_constant(rec, lambda) + a0 - g * std::log1p(mu / g) -
                    static_cast<double>(n) * std::log(mu + g);
  if (!grad && !hess) return ll;

  const double ng = static_cast<double>(n) + g;
  const double mg = mu + g;
  const double l_g = a1 - std::log1p(mu / g) + (mu - static_cast<double>(n)) / mg;
  if (grad) {
    grad->resize(j + 1);
    grad->head(j) = rec.counts.cast<double>() - (ng / mg) * s;
    (*grad)[j] = -g * l_g;
  }
  if (hess) {
    const double l_gg = a2 + mu / (g * mg) - (mu - static_cast<double>(n)) / (mg * mg);
    hess->resize(j + 1, j + 1);
    hess->topLeftCorner(j, j) = (ng / (mg * mg)) * (s * s.transpose());
    hess->topLeftCorner(j, j).diagonal() -= (ng / mg) * s;
    const Eigen::VectorXd l_phig = -((mu - static_cast<double>(n)) / (mg * mg)) * s;
    hess->col(j).head(j) = -g * l_phig;
    hess->row(j).head(j) = hess->col(j).head(j).transpose();
    (*hess)(j, j) = g * g * l_gg + g * l_g;
  }
  return ll;
}

double lognormal_shoe_loglik(const ShoeRecord& rec, const Eigen::VectorXd& lambda, double s2,
                             int order, Eigen::VectorXd* grad) {
  require(s2 > 0.0, "lognormal random effect needs a positive log-scale variance");
  const Eigen::Index j = rec.cells();
  Eigen::VectorXd s(j);
  for (Eigen::Index k = 0; k < j; ++k) s[k] = rec.s_area[k] > 0.0 ? lambda[k] * rec.s_area[k] : 0.0;
  const double mu = s.sum();
  const double n = static_cast<double>(rec.total);
  const double mean = -0.5 * s2;
  auto h = [&](double b) {
    const double z = b - mean;
    return n * b - mu * std::exp(b) - 0.5 * z * z / s2 - 0.5 * std::log(2.0 * std::numbers::pi * s2);
  };
  auto dh = [&](double b, double* d2) {
    const double e = mu * std::exp(b);
    if (d2) *d2 = -e - 1.0 / s2;
    return n - e - (b - mean) / s2;
  };
  // Concave in b: bracketed Newton for the mode.
  double lo = mean - 1.0, hi = mean + 1.0;
  while (dh(lo, nullptr) < 0.0) lo -= 2.0 * (hi - lo);
  while (dh(hi, nullptr) > 0.0) hi += 2.0 * (hi - lo);
  double b = std::clamp(mean, lo, hi), d2 = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double d1 = dh(b, &d2);
    if (d1 > 0.0) lo = b; else hi = b;
    double next = b - d1 / d2;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - b) <= 1e-13 * std::max(1.0, std::abs(b))) {
      b = next;
      break;
    }
    b = next;
  }
  dh(b, &d2);
  const double scale = 1.0 / std::sqrt(-d2);
  const GaussHermiteRule& rule = gauss_hermite(order);
  const Eigen::Index q = rule.nodes.size();
  Eigen::VectorXd nodes(q), logv(q);
  double lse = kNegInf;
  for (Eigen::Index k = 0; k < q; ++k) {
    nodes[k] = b + std::numbers::sqrt2 * scale * rule.nodes[k];
    logv[k] = rule.log_weights_plain[k] + h(nodes[k]);
    lse = log_add(lse, logv[k]);
  }
  const double ll = poisson_constant(rec, lambda) + std::log(std::numbers::sqrt2 * scale) + lse;
  if (grad) {
    // Posterior expectations of e^b and of d log density / d log s2.
    double ea = 0.0, dt = 0.0;
    for (Eigen::Index k = 0; k < q; ++k) {
      const double w = std::exp(logv[k] - lse);
      const double bb = nodes[k];
      ea += w * std::exp(bb);
      const double z = bb + 0.5 * s2;
      // d/dv of -(b + v/2)^2 / (2v) - log(v) / 2, times v.
      dt += w * (-(z * (0.5 * s2 - bb)) / (2.0 * s2) - 0.5);
    }
    grad->resize(j + 1);
    grad->head(j) = rec.counts.cast<double>() - ea * s;
    (*grad)[j] = dt;
  }
  return ll;
}

namespace {

// Regions that enter the likelihood: touched by some shoe and with RACs.
struct ActiveSet {
  std::vector<Eigen::Index> idx;
  std::vector<std::uint8_t> boundary;
  std::vector<std::uint8_t> undefined;
};

ActiveSet active_regions(const Totals& t) {
  ActiveSet a;
  const Eigen::Index j = t.n.size();
  a.boundary.assign(static_cast<std::size_t>(j), 0);
  a.undefined.assign(static_cast<std::size_t>(j), 0);
  for (Eigen::Index k = 0; k < j; ++k) {
    if (t.s[k] <= 0.0) {
      a.undefined[static_cast<std::size_t>(k)] = 1;
    } else if (t.n[k] == 0.0) {
      a.boundary[static_cast<std::size_t>(k)] = 1;
    } else {
      a.idx.push_back(k);
    }
  }
  return a;
}

// Records restricted to the active regions.
std::vector<ShoeRecord> restrict(std::span<const ShoeRecord> shoes,
                                 const std::vector<Eigen::Index>& idx) {
  std::vector<ShoeRecord> out;
  out.reserve(shoes.size());
  for (const auto& r : shoes) {
    ShoeRecord s;
    s.shoe_id = r.shoe_id;
    s.s_area.resize(static_cast<Eigen::Index>(idx.size()));
    s.counts.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      s.s_area[static_cast<Eigen::Index>(k)] = r.s_area[idx[k]];
      s.counts[static_cast<Eigen::Index>(k)] = r.counts[idx[k]];
    }
    s.total = r.total;
    out.push_back(std::move(s));
  }
  return out;
}

void fill_boundary(RegionFit& fit, const ActiveSet& a) {
  for (std::size_t k = 0; k < a.boundary.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    if (a.undefined[k]) {
      fit.lambda_hat[kk] = kNaN;
      fit.warnings.push_back("region " + std::to_string(k) + " undefined: no shoe touches it");
    } else if (a.boundary[k]) {
      fit.lambda_hat[kk] = 0.0;
      fit.warnings.push_back("region " + std::to_string(k) + " has no RACs: boundary estimate 0");
    }
  }
  fit.at_boundary = a.boundary;
}

// Covariance of lambda over all J regions from that of log lambda on the active set.
Eigen::MatrixXd expand_covariance(const Eigen::MatrixXd& cov_phi, const ActiveSet& a,
                                  const Eigen::VectorXd& lambda) {
  const Eigen::Index j = lambda.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(j, j);
  for (std::size_t p = 0; p < a.idx.size(); ++p) {
    for (std::size_t q = 0; q < a.idx.size(); ++q) {
      const Eigen::Index u = a.idx[p], v = a.idx[q];
      cov(u, v) = lambda[u] * lambda[v] *
                  cov_phi(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
    }
  }
  for (Eigen::Index k = 0; k < j; ++k) {
    if (!std::isfinite(lambda[k])) {
      cov.row(k).setConstant(kNaN);
      cov.col(k).setConstant(kNaN);
    }
  }
  return cov;
}

}  // namespace

RegionFit fit_re_region(std::span<const ShoeRecord> shoes, const RegionReOptions& opt) {
  const Eigen::Index j = check_records(shoes);
  const Totals t = totals(shoes, j);
  const ActiveSet act = active_regions(t);
  if (act.idx.empty()) fail(ErrorKind::kInvalidInput, "no region has any RACs");
  const std::vector<ShoeRecord> recs = restrict(shoes, act.idx);
  const Eigen::Index ja = static_cast<Eigen::Index>(act.idx.size());

  RegionFit fit;
  fit.method = Method::kRandomEffects;
  fit.prior = opt.prior;
  fit.lambda_hat = Eigen::VectorXd::Zero(j);

  // Poisson fit and the score for overdispersion at Var(a) = 0.
  Eigen::VectorXd lam0(ja);
  for (Eigen::Index k = 0; k < ja; ++k) lam0[k] = t.n[act.idx[static_cast<std::size_t>(k)]] /
                                                  t.s[act.idx[static_cast<std::size_t>(k)]];
  double disp = 0.0;
  for (const auto& r : recs) {
    const double mu = r.s_area.dot(lam0);
    const double n = static_cast<double>(r.total);
    disp += 0.5 * ((n - mu) * (n - mu) - n);
  }

  auto finish_poisson = [&]() {
    for (Eigen::Index k = 0; k < ja; ++k) fit.lambda_hat[act.idx[static_cast<std::size_t>(k)]] = lam0[k];
    fill_boundary(fit, act);
    fit.var_a_hat = 0.0;
    fit.warnings.push_back("no overdispersion: Var(a) at the boundary 0, Poisson estimate used");
    double ll = 0.0;
    for (const auto& r : recs) ll += poisson_shoe_loglik(r, lam0, 1.0);
    fit.log_likelihood = ll;
    if (opt.compute_covariance) {
      Eigen::MatrixXd cov_phi = Eigen::MatrixXd::Zero(ja, ja);
      for (Eigen::Index k = 0; k < ja; ++k) {
        cov_phi(k, k) = 1.0 / t.n[act.idx[static_cast<std::size_t>(k)]];
      }
      fit.covariance = expand_covariance(cov_phi, act, fit.lambda_hat);
    }
    return fit;
  };
  if (disp <= 0.0) return finish_poisson();

  const int order = opt.quadrature_order;
  const bool gamma = opt.prior == Prior::kGamma;
  auto value_grad = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    const Eigen::VectorXd lam = x.head(ja).array().exp().matrix();
    const double v = std::exp(x[ja]);
    if (g) g->setZero(ja + 1);
    double ll = 0.0;
    Eigen::VectorXd gi;
    for (const auto& r : recs) {
      ll += gamma ? gamma_shoe_loglik(r, lam, v, g ? &gi : nullptr)
                  : lognormal_shoe_loglik(r, lam, v, order, g ? &gi : nullptr);
      if (g) *g += gi;
    }
    if (g) *g = -*g;
    return -ll;
  };
  auto second_order = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
    if (!gamma) {
      const double f = value_grad(x, g);
      if (h) *h = numeric_hessian(value_grad, x);
      return f;
    }
    const Eigen::VectorXd lam = x.head(ja).array().exp().matrix();
    const double v = std::exp(x[ja]);
    if (g) g->setZero(ja + 1);
    if (h) h->setZero(ja + 1, ja + 1);
    double ll = 0.0;
    Eigen::VectorXd gi;
    Eigen::MatrixXd hi;
    for (const auto& r : recs) {
      ll += gamma_shoe_loglik(r, lam, v, g ? &gi : nullptr, h ? &hi : nullptr);
      if (g) *g += gi;
      if (h) *h += hi;
    }
    if (g) *g = -*g;
    if (h) *h = -*h;
    return -ll;
  };

  Eigen::VectorXd x0(ja + 1);
  x0.head(ja) = lam0.array().log().matrix();
  {
    Eigen::VectorXd lam_full = Eigen::VectorXd::Constant(j, kNaN);
    for (Eigen::Index k = 0; k < ja; ++k) lam_full[act.idx[static_cast<std::size_t>(k)]] = lam0[k];
    for (std::size_t k = 0; k < act.boundary.size(); ++k) {
      if (act.boundary[k]) lam_full[static_cast<Eigen::Index>(k)] = 0.0;
    }
    const double va = estimate_var_a(shoes, lam_full);
    // Lognormal: Var(a) = exp(s2) - 1.
    const double v0 = std::max(va, 0.05);
    x0[ja] = std::log(gamma ? v0 : std::log1p(v0));
  }

  const MinimizeResult r = minimize_newton(second_order, x0, opt.optim);
  if (!r.converged) {
    fail(ErrorKind::kConvergence, "random-effects region fit did not converge: " + r.summary());
  }
  if (r.x[ja] < std::log(1e-10)) return finish_poisson();

  for (Eigen::Index k = 0; k < ja; ++k) {
    fit.lambda_hat[act.idx[static_cast<std::size_t>(k)]] = std::exp(r.x[k]);
  }
  fill_boundary(fit, act);
  const double v = std::exp(r.x[ja]);
  fit.var_a_hat = gamma ? v : std::expm1(v);
  fit.log_likelihood = -r.f;
  fit.iterations = r.iterations;
  if (opt.compute_covariance) {
    Eigen::MatrixXd h;
    if (gamma) {
      Eigen::VectorXd g;
      second_order(r.x, &g, &h);
    } else {
      h = numeric_hessian(value_grad, r.x);
    }
    const Eigen::MatrixXd cov = inverse_spd(h, "random-effects region fit");
    fit.covariance = expand_covariance(cov.topLeftCorner(ja, ja), act, fit.lambda_hat);
  }
  return fit;
}

// --- conditional likelihood ----------------------------------------------------

double cml_region_loglik(std::span<const ShoeRecord> shoes, const Eigen::VectorXd& lambda) {
  double ll = 0.0;
  for (const auto& r : shoes) {
    if (r.total == 0) continue;
    const double den = expected_total(r, lambda);
    for (Eigen::Index k = 0; k < r.cells(); ++k) {
      const int n = r.counts[k];
      if (n == 0) continue;
      ll += n * (std::log(lambda[k]) + std::log(r.s_area[k]) - std::log(den));
    }
  }
  return ll;
}

Eigen::VectorXd cml_region_score(std::span<const ShoeRecord> shoes, const Eigen::VectorXd& lambda) {
  const Eigen::Index j = lambda.size();
  Eigen::VectorXd sc = Eigen::VectorXd::Zero(j);
  Eigen::VectorXd ntot = Eigen::VectorXd::Zero(j);
  for (const auto& r : shoes) {
    ntot += r.counts.cast<double>();
    if (r.total == 0) continue;
    const double den = expected_total(r, lambda);
    sc -= (static_cast<double>(r.total) / den) * r.s_area;
  }
  for (Eigen::Index k = 0; k < j; ++k) {
    if (ntot[k] > 0.0) sc[k] += ntot[k] / lambda[k];
  }
  return sc;
}

double conditional_multinomial_logprob(const Eigen::VectorXi& counts, const Eigen::VectorXd& s_area,
                                       const Eigen::VectorXd& lambda) {
  require(counts.size() == s_area.size() && counts.size() == lambda.size(),
          "counts, areas and lambda must have equal length");
  const Eigen::VectorXd mu = lambda.cwiseProduct(s_area);
  const double tot = mu.sum();
  const int n = counts.sum();
  double lp = std::lgamma(n + 1.0);
  for (Eigen::Index k = 0; k < counts.size(); ++k) {
    const int c = counts[k];
    lp -= std::lgamma(c + 1.0);
    if (c > 0) lp += c * std::log(mu[k] / tot);
  }
  return lp;
}

RegionFit fit_cml_region(std::span<const ShoeRecord> shoes, const CmlRegionOptions& opt) {
  const Eigen::Index j = check_records(shoes);
  const Totals t = totals(shoes, j);
  const ActiveSet act = active_regions(t);
  if (act.idx.empty()) fail(ErrorKind::kInvalidInput, "no region has any RACs");
  const std::vector<ShoeRecord> recs = restrict(shoes, act.idx);
  const Eigen::Index ja = static_cast<Eigen::Index>(act.idx.size());
  Eigen::VectorXd nj(ja);
  for (Eigen::Index k = 0; k < ja; ++k) nj[k] = t.n[act.idx[static_cast<std::size_t>(k)]];

  // Free parameters: log lambda of active regions 1..ja-1; region 0 is the reference.
  auto full_phi = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd phi(ja);
    phi[0] = 0.0;
    phi.tail(ja - 1) = x;
    return phi;
  };
  auto f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
    const Eigen::VectorXd phi = full_phi(x);
    const double pmax = phi.maxCoeff();
    const Eigen::VectorXd w = (phi.array() - pmax).exp().matrix();
    double ll = nj.dot(phi);
    Eigen::VectorXd gf = nj;
    Eigen::MatrixXd hf = Eigen::MatrixXd::Zero(ja, ja);
    for (const auto& r : recs) {
      if (r.total == 0) continue;
      const Eigen::VectorXd sw = r.s_area.cwiseProduct(w);
      const double den = sw.sum();
      const double n = static_cast<double>(r.total);
      ll -= n * (std::log(den) + pmax);
      const Eigen::VectorXd pi = sw / den;
      gf -= n * pi;
      if (h) {
        hf.diagonal() += n * pi;
        hf.noalias() -= n * pi * pi.transpose();
      }
    }
    if (g) *g = -gf.tail(ja - 1);
    if (h) *h = hf.bottomRightCorner(ja - 1, ja - 1);
    return -ll;
  };

  RegionFit fit;
  fit.method = Method::kCml;
  fit.lambda_hat = Eigen::VectorXd::Zero(j);
  fit.reference_region = static_cast<int>(act.idx.front());

  Eigen::VectorXd x = Eigen::VectorXd::Zero(ja - 1);
  if (ja > 1) {
    // Start from the pooled ratio estimate.
    for (Eigen::Index k = 1; k < ja; ++k) {
      const auto u = act.idx[static_cast<std::size_t>(k)];
      const auto r0 = act.idx.front();
      x[k - 1] = std::log((t.n[u] / t.s[u]) / (t.n[r0] / t.s[r0]));
    }
    const MinimizeResult r = minimize_newton(f, x, opt.optim);
    if (!r.converged) {
      fail(ErrorKind::kConvergence, "conditional region fit did not converge: " + r.summary());
    }
    x = r.x;
    fit.iterations = r.iterations;
  }
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  fit.log_likelihood = -f(x, &g, &h);
  const Eigen::VectorXd phi = full_phi(x);
  for (Eigen::Index k = 0; k < ja; ++k) {
    fit.lambda_hat[act.idx[static_cast<std::size_t>(k)]] = std::exp(phi[k]);
  }
  fill_boundary(fit, act);

  // Score in the lambda scale over the free regions.
  const Eigen::VectorXd lam_active = phi.array().exp().matrix();
  Eigen::VectorXd sc = cml_region_score(recs, lam_active);
  fit.score_residual = ja > 1 ? sc.tail(ja - 1).lpNorm<Eigen::Infinity>() : 0.0;

  if (opt.compute_covariance) {
    Eigen::MatrixXd cov_phi = Eigen::MatrixXd::Zero(ja, ja);
    if (ja > 1) cov_phi.bottomRightCorner(ja - 1, ja - 1) = inverse_spd(h, "conditional region fit");
    fit.covariance = expand_covariance(cov_phi, act, fit.lambda_hat);
  }
  return fit;
}

RegionFit rescale_cml(RegionFit fit, const RegionFit& reference) {
  if (fit.cells() != reference.cells()) {
    fail(ErrorKind::kInvalidInput, "rescaling: fits have different numbers of regions");
  }
  double fs = 0.0, rs = 0.0;
  int n = 0;
  for (Eigen::Index k = 0; k < fit.cells(); ++k) {
    if (!std::isfinite(fit.lambda_hat[k]) || !std::isfinite(reference.lambda_hat[k])) continue;
    fs += fit.lambda_hat[k];
    rs += reference.lambda_hat[k];
    ++n;
  }
  if (n == 0 || fs <= 0.0 || rs <= 0.0) {
    fail(ErrorKind::kInvalidInput, "rescaling: zero mean in the fit or the reference");
  }
  const double c = (rs / n) / (fs / n);
  fit.lambda_hat *= c;
  if (fit.covariance) *fit.covariance *= c * c;
  fit.rescale_constant = fit.rescale_constant.value_or(1.0) * c;
  fit.cis.reset();
  return fit;
}

Eigen::VectorXd region_se(const RegionFit& fit) {
  if (fit.lambda_var) return fit.lambda_var->cwiseMax(0.0).cwiseSqrt();
  if (fit.covariance) return fit.covariance->diagonal().cwiseMax(0.0).cwiseSqrt();
  fail(ErrorKind::kInvalidState, "fit has no variance information");
}

std::vector<Interval> region_ci(const RegionFit& fit, double level,
                                std::span<const ShoeRecord> shoes) {
  const double z = critical_value(level);
  const Eigen::VectorXd se = region_se(fit);
  Eigen::VectorXd s_tot = Eigen::VectorXd::Zero(fit.cells());
  for (const auto& r : shoes) {
    if (r.cells() == fit.cells()) s_tot += r.s_area;
  }
  std::vector<Interval> out(static_cast<std::size_t>(fit.cells()));
  for (Eigen::Index k = 0; k < fit.cells(); ++k) {
    const double l = fit.lambda_hat[k];
    auto& ci = out[static_cast<std::size_t>(k)];
    if (!std::isfinite(l)) {
      ci = {kNaN, kNaN};
    } else if (!fit.at_boundary.empty() && fit.at_boundary[static_cast<std::size_t>(k)]) {
      ci = {0.0, s_tot[k] > 0.0 ? -std::log1p(-level) / s_tot[k] : kNaN};
    } else {
      ci = {std::max(0.0, l - z * se[k]), l + z * se[k]};
    }
  }
  return out;
}

}  // namespace racint
