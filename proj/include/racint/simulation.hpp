#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "racint/partitioning.hpp"
#include "racint/rng.hpp"
#include "racint/shoe_data.hpp"
#include "racint/stratified.hpp"
#include "racint/subsampling.hpp"

namespace racint {

// --- wear factor laws ---------------------------------------------------------

enum class ALawKind { kNormal, kGamma, kUniform, kShiftedBernoulli, kEmpirical, kConstant };

/// Distribution of the shoe effect a_i. Parameter meaning per kind:
///   normal            p1 = sd (additive on the logit, mean 0)
///   gamma             p1 = shape, p2 = scale
///   uniform           [p1, p2]
///   shifted_bernoulli p1 w.p. p3, else p2
///   empirical         resampled from a supplied vector (already mean 1)
///   constant          p1
struct ALaw {
  ALawKind kind = ALawKind::kConstant;
  double p1 = 1.0;
  double p2 = 0.0;
  double p3 = 0.5;

  static ALaw normal(double sd) { return {ALawKind::kNormal, sd, 0.0, 0.0}; }
  static ALaw gamma(double shape, double scale) { return {ALawKind::kGamma, shape, scale, 0.0}; }
  static ALaw uniform(double lo, double hi) { return {ALawKind::kUniform, lo, hi, 0.0}; }
  static ALaw shifted_bernoulli(double lo, double hi, double p_lo) {
    return {ALawKind::kShiftedBernoulli, lo, hi, p_lo};
  }
  static ALaw empirical() { return {ALawKind::kEmpirical, 0.0, 0.0, 0.0}; }
  static ALaw constant(double v) { return {ALawKind::kConstant, v, 0.0, 0.0}; }

  double mean() const;
  double variance() const;
};

const char* to_string(ALawKind k);
ALawKind alaw_kind_from_string(const std::string& s);

/// Throws invalid-input on out-of-range parameters.
void validate(const ALaw& law);

/// One draw. Empirical laws draw uniformly from `pool`.
double draw_a(const ALaw& law, Rng& rng, std::span<const double> pool = {});

// --- logistic cluster design -----------------------------------------------------

struct LogisticData {
  std::vector<ClusterSample> clusters;  // unit k of every cluster sits at x[k]
  Eigen::VectorXd x;
  Eigen::VectorXd a;  // realized cluster effects
};

/// m clusters of `size` units at equispaced x on [0, 1];
/// P(y = 1 | a) = logistic(beta0 + beta1 x + beta2 x^2 + a), a ~ N(0, a_sd^2).
LogisticData generate_logistic(int m, int size, const Eigen::Vector3d& beta, double a_sd,
                               std::uint64_t seed);

/// Design row (1, x, x^2) for unit k, optionally without the intercept.
DesignFn quadratic_design(Eigen::VectorXd x, bool drop_intercept);

// --- region Poisson design ----------------------------------------------------

/// Sole silhouette on a grid (a waisted oval filling the frame).
ContactMask sole_silhouette(GridDims grid);

/// Synthetic contact surface: the silhouette intersected with random discs until
/// `coverage` of it is covered. coverage >= 1 returns the silhouette.
ContactMask synthetic_contact(GridDims grid, double coverage, Rng& rng);

struct SurfaceSpec {
  GridDims grid{99, 77};
  int shoes = 386;
  double coverage = 0.55;         // mean covered fraction of the silhouette
  double coverage_spread = 0.5;   // per-shoe coverage ~ U(coverage +/- spread/2)
  double base_var_a = 0.5;        // Var(a) of the gamma law behind the empirical n_i
  std::uint64_t seed = 2018;
};

/// A fixed synthetic shoe population: contact areas per region (as fractions
/// of each region's area) and the empirical wear factors n_i / mean(n_i).
struct Population {
  Partition partition;
  std::vector<Eigen::VectorXd> s_area;
  std::vector<double> empirical_a;
};

Population make_population(const SurfaceSpec& spec, const Partition& partition,
                           const Eigen::VectorXd& lambda);

/// Counts N_ij ~ Poisson(lambda_j S_ij a_i) for given a.
std::vector<ShoeRecord> generate_region_given_a(std::span<const Eigen::VectorXd> s_area,
                                                const Eigen::VectorXd& lambda,
                                                std::span<const double> a, Rng& rng);

/// Draws a_i from the law, then the counts.
std::vector<ShoeRecord> generate_region(std::span<const Eigen::VectorXd> s_area,
                                        const Eigen::VectorXd& lambda, const ALaw& law,
                                        std::uint64_t seed, std::span<const double> pool = {});

/// Smooth synthetic pixel intensity shape (peaks at the ball and the heel), mean 1
/// over the silhouette.
Eigen::MatrixXd synthetic_intensity(GridDims grid);

struct GenerateParams {
  int shoes = 386;
  double avg_racs = 34.0;
  double coverage = 0.55;
  double coverage_spread = 0.5;
  ALaw a_law = ALaw::gamma(2.0, 0.5);
  GridDims grid{};
  std::uint64_t seed = 1;
};

/// Pixel-resolution synthetic data set: contact masks and Poisson counts with
/// intensity proportional to synthetic_intensity, scaled so the expected mean
/// RAC count per shoe is avg_racs.
std::vector<StandardShoe> generate_shoes(const GenerateParams& p);

// --- scenarios ------------------------------------------------------------------

enum class Design { kLogisticCluster, kRegionPoisson };

const char* to_string(Design d);
Design design_from_string(const std::string& s);

struct Scenario {
  std::string scenario_id;
  std::string description;
  Design design = Design::kRegionPoisson;
  int replications = 100;
  int full_replications = 500;
  std::uint64_t seed = 1;

  // logistic_cluster
  int clusters = 500;
  int cluster_size = 500;
  Eigen::Vector3d beta{-3.0, 2.0, -2.0};
  int controls_per_cluster = 20;
  int quadrature_order = 21;
  std::vector<SamplingScheme> schemes{SamplingScheme::kFull, SamplingScheme::kRandom,
                                      SamplingScheme::kCcPooled, SamplingScheme::kCcWithinPropSize,
                                      SamplingScheme::kCcWithinPropCases};

  // region_poisson
  int shoes = 386;
  std::string partition = "expert";  // "expert" or "blocks:RxC"
  Eigen::VectorXd lambda;
  bool resample_shoes = false;       // bootstrap S and a independently each replication
  SurfaceSpec surface{};

  ALaw a_law = ALaw::empirical();
};

/// Throws invalid-input on inconsistent settings.
void validate(const Scenario& sc);

struct MethodStats {
  std::string method;
  Eigen::VectorXd mean_estimate;
  Eigen::VectorXd bias;
  Eigen::VectorXd variance;  // 1/R denominator
  Eigen::VectorXd mse;
  double mean_abs_bias = 0.0;
  double mean_mse = 0.0;
  int successes = 0;
  int failures = 0;
  std::vector<std::string> failure_messages;  // first few
};

struct ComparisonTable {
  std::string scenario_id;
  int replications = 0;
  std::vector<std::string> cells;
  Eigen::VectorXd truth;
  std::vector<MethodStats> methods;

  const MethodStats& method(const std::string& name) const;
};

struct RunOptions {
  std::optional<int> replications;  // overrides the scenario
  bool full = false;                 // paper-scale replication count
};

/// Runs every replication in order; identical (scenario, options) give
/// identical tables.
ComparisonTable run_scenario(const Scenario& sc, const RunOptions& opt = {});

/// Accumulates replicate estimates (rows) into bias / variance / MSE.
MethodStats summarize(std::string method, const std::vector<Eigen::VectorXd>& estimates,
                      const Eigen::VectorXd& truth);

/// The shipped scenario set: the baseline, the eleven variations and the
/// sub-sampling study.
std::vector<Scenario> builtin_scenarios();

/// Partition named by a scenario on a grid.
Partition scenario_partition(const std::string& name, GridDims grid);

}  // namespace racint
