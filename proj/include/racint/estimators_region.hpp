#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "racint/estimators_pixel.hpp"
#include "racint/optimize.hpp"
#include "racint/shoe_data.hpp"

namespace racint {

enum class Prior { kGamma, kLognormal };

const char* to_string(Prior p);
Prior prior_from_string(const std::string& s);

/// Piecewise-constant intensity on J regions. Regions no shoe touches hold NaN.
struct RegionFit {
  Method method = Method::kNaive;
  std::optional<Prior> prior;                 // random-effects fits only
  Eigen::VectorXd lambda_hat;
  std::optional<Eigen::VectorXd> lambda_var;  // naive plug-in variance
  std::optional<double> var_a_hat;            // Var(a)
  std::optional<Eigen::MatrixXd> covariance;  // of lambda_hat
  std::optional<double> rescale_constant;
  std::optional<std::vector<Interval>> cis;
  std::vector<std::uint8_t> at_boundary;      // lambda_hat = 0 boundary estimate
  std::optional<double> log_likelihood;
  std::optional<double> score_residual;       // sup-norm of the CML score, lambda scale
  int reference_region = -1;                  // CML: the region fixed at 1
  int iterations = 0;
  std::vector<std::string> warnings;

  Eigen::Index cells() const { return lambda_hat.size(); }
};

/// Checks that every record has the same number of cells and is valid; returns J.
Eigen::Index check_records(std::span<const ShoeRecord> shoes);

/// lambda_j = mean over shoes with S_ij > 0 of n_ij / S_ij, with the plug-in
/// variance attached.
RegionFit naive_region(std::span<const ShoeRecord> shoes);

struct NaiveVariance {
  Eigen::VectorXd var;
  double var_a = 0.0;      // after clamping
  double var_a_raw = 0.0;  // before clamping
  bool clamped = false;
};

/// m^-1 sum_i U_i - 1 with U_i = (N_i^2 - N_i) / (sum_j lambda_j S_ij)^2.
/// Shoes with zero expected count are skipped. Undefined (NaN) regions are ignored.
double estimate_var_a(std::span<const ShoeRecord> shoes, const Eigen::VectorXd& lambda);

/// Per-region variance lambda_j^2 Var(a) / |m_j| + lambda_j |m_j|^-2 sum_{i in m_j} 1 / S_ij.
/// A negative Var(a) estimate is clamped to 0.
NaiveVariance var_naive(std::span<const ShoeRecord> shoes, const Eigen::VectorXd& lambda);

// --- random effects ---------------------------------------------------------

/// Closed-form log marginal likelihood of one shoe with a ~ Gamma(shape 1/v,
/// rate 1/v), v = Var(a) > 0 (negative multinomial). Gradients with respect to
/// (log lambda, log v), over all J cells.
double gamma_shoe_loglik(const ShoeRecord& rec, const Eigen::VectorXd& lambda, double var_a,
                         Eigen::VectorXd* grad = nullptr, Eigen::MatrixXd* hess = nullptr);

/// Log marginal likelihood of one shoe with a = exp(b), b ~ N(-s2/2, s2), by
/// adaptive Gauss-Hermite quadrature. Gradient with respect to (log lambda, log s2).
double lognormal_shoe_loglik(const ShoeRecord& rec, const Eigen::VectorXd& lambda, double s2,
                             int order, Eigen::VectorXd* grad = nullptr);

/// Poisson log-likelihood of one shoe given a (the integrand of the marginal).
double poisson_shoe_loglik(const ShoeRecord& rec, const Eigen::VectorXd& lambda, double a);

struct RegionReOptions {
  Prior prior = Prior::kGamma;
  int quadrature_order = 21;
  bool compute_covariance = true;
  MinimizeOptions optim = with_tolerances(1e-9, 0.0);
};

/// Maximum marginal likelihood over (lambda, Var(a)). Regions with no RACs are
/// boundary estimates lambda = 0; data without overdispersion give Var(a) = 0
/// and the Poisson estimate.
RegionFit fit_re_region(std::span<const ShoeRecord> shoes, const RegionReOptions& opt = {});

// --- conditional (multinomial) likelihood -----------------------------------

/// sum_i sum_j n_ij [log lambda_j + log S_ij - log sum_j' S_ij' lambda_j'].
/// Cells with n_ij = 0 contribute nothing; lambda_j = 0 with n_ij > 0 gives -inf.
double cml_region_loglik(std::span<const ShoeRecord> shoes, const Eigen::VectorXd& lambda);

/// d/d lambda_k of cml_region_loglik.
Eigen::VectorXd cml_region_score(std::span<const ShoeRecord> shoes, const Eigen::VectorXd& lambda);

/// log P(N_i1..N_iJ = counts | N_i = total) under independent Poissons with
/// means lambda_j S_j.
double conditional_multinomial_logprob(const Eigen::VectorXi& counts, const Eigen::VectorXd& s_area,
                                       const Eigen::VectorXd& lambda);

struct CmlRegionOptions {
  bool compute_covariance = true;
  MinimizeOptions optim = with_tolerances(1e-11, 0.0);
};

/// Newton in log lambda with lambda = 1 at the first region that has RACs.
/// The returned fit is not rescaled.
RegionFit fit_cml_region(std::span<const ShoeRecord> shoes, const CmlRegionOptions& opt = {});

/// Multiplies lambda by c = mean(reference) / mean(fit) over regions defined in
/// both, covariance by c^2.
RegionFit rescale_cml(RegionFit fit, const RegionFit& reference);

/// lambda_j -/+ z SE_j floored at 0. Boundary regions get the one-sided
/// [0, -log(1 - level) / sum_i S_ij] and keep their flag. Throws invalid-state
/// without variance information.
std::vector<Interval> region_ci(const RegionFit& fit, double level,
                                std::span<const ShoeRecord> shoes);

/// Standard errors: sqrt of lambda_var (naive) or of the covariance diagonal.
Eigen::VectorXd region_se(const RegionFit& fit);

}  // namespace racint
