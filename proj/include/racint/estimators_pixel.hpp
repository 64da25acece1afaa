#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "racint/optimize.hpp"
#include "racint/shoe_data.hpp"
#include "racint/spline_basis.hpp"
#include "racint/stratified.hpp"
#include "racint/subsampling.hpp"

namespace racint {

enum class Method { kNaive, kRandomEffects, kCml };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Standard normal quantile.
double normal_quantile(double p);

/// Two-sided critical value for a confidence level in (0, 1).
double critical_value(double level);

// ---------------------------------------------------------------------------
// Clustered logistic building blocks. Log-likelihoods are returned as values
// to maximize; the optimizers minimize their negatives.
// ---------------------------------------------------------------------------

/// Bernoulli log-likelihood without random effects, offsets included.
double logistic_loglik(std::span<const Stratum> strata, const Eigen::VectorXd& beta,
                       Eigen::VectorXd* grad = nullptr, Eigen::MatrixXd* hess = nullptr);

struct LogisticFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd information;  // observed information at beta
  double log_likelihood = 0.0;
  int iterations = 0;
};

/// Plain (pooled) logistic regression by Newton-Raphson.
LogisticFit fit_logistic(std::span<const Stratum> strata, const MinimizeOptions& opt = {});

/// Marginal log-likelihood of one cluster under a N(0, theta^2) random
/// intercept, integrated by adaptive Gauss-Hermite quadrature recentred at the
/// posterior mode and scaled by its curvature. theta == 0 gives the plain
/// logistic contribution. Gradients are with respect to beta and log(theta).
double re_cluster_loglik(const Stratum& s, const Eigen::VectorXd& beta, double theta, int order,
                         Eigen::VectorXd* grad_beta = nullptr, double* grad_log_theta = nullptr);

/// Sum over clusters; params = (beta, log theta).
double re_marginal_loglik(std::span<const Stratum> strata, const Eigen::VectorXd& params,
                          int order, Eigen::VectorXd* grad = nullptr);

struct GlmmOptions {
  int quadrature_order = 21;
  double initial_theta = 0.5;
  std::optional<double> fixed_theta;  // hold theta at this value (0 allowed)
  bool init_from_logistic = true;
  bool compute_covariance = true;
  MinimizeOptions optim{};
};

struct GlmmFit {
  Eigen::VectorXd beta;
  double theta = 0.0;
  /// Covariance of (beta, log theta); beta block only when theta is fixed or at
  /// the boundary.
  std::optional<Eigen::MatrixXd> covariance;
  double log_likelihood = 0.0;
  double initial_log_likelihood = 0.0;  // at beta = 0, theta = initial_theta
  int iterations = 0;
  std::vector<std::string> warnings;
};

/// Random-intercept logistic regression by maximum marginal likelihood (BFGS).
/// Throws convergence on failure, singular-fit when the information is not
/// invertible.
GlmmFit fit_glmm(std::span<const Stratum> strata, const GlmmOptions& opt = {});

/// log e_n(exp(eta)): log of the elementary symmetric polynomial of degree n in
/// the weights exp(eta_j), i.e. log sum over n-subsets u of exp(sum_{j in u} eta_j).
/// Computed with the subset-sum recursion in log space.
double log_esp(const Eigen::VectorXd& eta, int n);

/// First-order inclusion probabilities of the conditional (fixed-size)
/// Bernoulli design: pi_j = d log e_n / d eta_j.
Eigen::VectorXd inclusion_probabilities(const Eigen::VectorXd& eta, int n,
                                        double* log_denominator = nullptr);

/// d^2 log e_n / d eta d eta^T: the covariance of the inclusion indicators.
Eigen::MatrixXd inclusion_covariance(const Eigen::VectorXd& eta, int n);

/// Stratified conditional logistic log-likelihood given each stratum's case
/// count. Strata with no cases or no controls contribute zero.
double clogit_loglik(std::span<const Stratum> strata, const Eigen::VectorXd& beta,
                     Eigen::VectorXd* grad = nullptr, Eigen::MatrixXd* hess = nullptr);

struct ClogitOptions {
  bool compute_covariance = true;
  MinimizeOptions optim = with_tolerances(1e-9, 0.0);
};

struct ClogitFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;
  double log_likelihood = 0.0;
  Eigen::VectorXd score;
  int iterations = 0;
  int strata_used = 0;
  std::vector<std::string> warnings;
};

/// Strata that carry conditional information (0 < cases < rows); the others
/// are reported in `warnings`.
std::vector<Stratum> informative_strata(std::span<const Stratum> strata,
                                        std::vector<std::string>& warnings);

/// Conditional maximum likelihood by Newton-Raphson on the exact conditional
/// likelihood. The design must not contain an intercept column.
ClogitFit fit_clogit(std::span<const Stratum> strata, const ClogitOptions& opt = {});

// ---------------------------------------------------------------------------
// Pixel-resolution estimators.
// ---------------------------------------------------------------------------

/// Intensity surface on the standardized grid. Undefined pixels hold NaN.
struct PixelFit {
  Method method = Method::kNaive;
  GridDims grid;
  Eigen::MatrixXd lambda_hat;
  std::optional<Eigen::MatrixXd> lambda_var;  // naive only
  std::optional<SplineSpec> spline;
  std::optional<double> sigma_hat;             // random-intercept SD
  std::optional<Eigen::MatrixXd> covariance;   // of spline.beta (full design width)
  std::optional<double> log_likelihood;
  std::optional<double> var_a_hat;             // naive moment estimate of Var(a)
  std::optional<double> rescale_constant;      // CML surfaces, see rescale_to_reference
  SubsampleMeta sample_meta;
  int iterations = 0;
  std::vector<std::string> warnings;
};

/// lambda_j = sum_i n_ij / sum_i S_ij over shoes touching pixel j, with
/// Var(lambda_j) = (lambda_j^2 Var(a) + lambda_j) / |m_j|.
PixelFit naive_pixel(std::span<const StandardShoe> shoes);

/// Uniform (2h+1)^2 moving average over defined entries; undefined (NaN)
/// entries stay undefined and are excluded from every window.
Eigen::MatrixXd kernel_smooth(const Eigen::MatrixXd& lambda, int half_width = 10);

/// Random-intercept logistic spline fit on a (sub-)sample of contact pixels.
/// Per-cluster offsets log(rho1/rho0) from the sampling metadata enter the
/// linear predictor; the reported surface is exp(g).
PixelFit fit_re_pixel(const Subsample& sample, GridDims grid, const Eigen::VectorXd& knots_x,
                      const Eigen::VectorXd& knots_y, const GlmmOptions& opt = {});

/// Conditional logistic spline fit. The intercept is not identified; the
/// surface exp(g) is relative until rescaled.
PixelFit fit_cml_pixel(const Subsample& sample, GridDims grid, const Eigen::VectorXd& knots_x,
                       const Eigen::VectorXd& knots_y, const ClogitOptions& opt = {});

/// Scales a surface so its mean over the reference's defined pixels equals the
/// reference mean; records the constant.
void rescale_to_reference(PixelFit& fit, const PixelFit& reference);

/// Pointwise intervals at grid pixels (row, col). Spline fits: delta method on
/// g, then exp (times any rescale constant). Naive fits: normal interval
/// floored at zero. Throws invalid-input for a level outside (0, 1) and
/// invalid-state when the fit has no variance information.
std::vector<Interval> pointwise_ci(const PixelFit& fit, double level,
                                   std::span<const std::pair<int, int>> at);

/// Surface exp(g) of a spline over every pixel of the grid.
Eigen::MatrixXd spline_surface(const SplineSpec& spec, GridDims grid);

}  // namespace racint
