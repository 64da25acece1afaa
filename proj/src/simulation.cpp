#include "racint/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "racint/error.hpp"
#include "racint/estimators_pixel.hpp"
#include "racint/estimators_region.hpp"

namespace racint {

// --- a laws -------------------------------------------------------------------

const char* to_string(ALawKind k) {
  switch (k) {
    case ALawKind::kNormal: return "normal";
    case ALawKind::kGamma: return "gamma";
    case ALawKind::kUniform: return "uniform";
    case ALawKind::kShiftedBernoulli: return "shifted_bernoulli";
    case ALawKind::kEmpirical: return "empirical";
    case ALawKind::kConstant: return "constant";
  }
  return "unknown";
}

ALawKind alaw_kind_from_string(const std::string& s) {
  for (auto k : {ALawKind::kNormal, ALawKind::kGamma, ALawKind::kUniform,
                 ALawKind::kShiftedBernoulli, ALawKind::kEmpirical, ALawKind::kConstant}) {
    if (s == to_string(k)) return k;
  }
  fail(ErrorKind::kInvalidInput, "unknown a law '" + s + "'");
}

double ALaw::mean() const {
  switch (kind) {
    case ALawKind::kNormal: return 0.0;
    case ALawKind::kGamma: return p1 * p2;
    case ALawKind::kUniform: return 0.5 * (p1 + p2);
    case ALawKind::kShiftedBernoulli: return p3 * p1 + (1.0 - p3) * p2;
    case ALawKind::kEmpirical: return 1.0;
    case ALawKind::kConstant: return p1;
  }
  return 0.0;
}

double ALaw::variance() const {
  switch (kind) {
    case ALawKind::kNormal: return p1 * p1;
    case ALawKind::kGamma: return p1 * p2 * p2;
    case ALawKind::kUniform: return (p2 - p1) * (p2 - p1) / 12.0;
    case ALawKind::kShiftedBernoulli: return p3 * (1.0 - p3) * (p2 - p1) * (p2 - p1);
    case ALawKind::kEmpirical: return std::numeric_limits<double>::quiet_NaN();
    case ALawKind::kConstant: return 0.0;
  }
  return 0.0;
}

void validate(const ALaw& law) {
  switch (law.kind) {
    case ALawKind::kNormal: require(law.p1 >= 0.0, "normal a law: sd must be >= 0"); break;
    case ALawKind::kGamma:
      require(law.p1 > 0.0 && law.p2 > 0.0, "gamma a law: shape and scale must be positive");
      break;
    case ALawKind::kUniform:
      require(law.p1 >= 0.0 && law.p2 > law.p1, "uniform a law: need 0 <= lo < hi");
      break;
    case ALawKind::kShiftedBernoulli:
      require(law.p1 >= 0.0 && law.p2 >= 0.0 && law.p3 >= 0.0 && law.p3 <= 1.0,
              "shifted Bernoulli a law: values must be >= 0 and p in [0, 1]");
      break;
    case ALawKind::kEmpirical: break;
    case ALawKind::kConstant: require(law.p1 >= 0.0, "constant a law: value must be >= 0"); break;
  }
}

double draw_a(const ALaw& law, Rng& rng, std::span<const double> pool) {
  switch (law.kind) {
    case ALawKind::kNormal: return std::normal_distribution<double>(0.0, law.p1)(rng);
    case ALawKind::kGamma: return std::gamma_distribution<double>(law.p1, law.p2)(rng);
    case ALawKind::kUniform: return std::uniform_real_distribution<double>(law.p1, law.p2)(rng);
    case ALawKind::kShiftedBernoulli:
      return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < law.p3 ? law.p1 : law.p2;
    case ALawKind::kEmpirical: {
      require(!pool.empty(), "empirical a law needs a pool of values");
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      return pool[pick(rng)];
    }
    case ALawKind::kConstant: return law.p1;
  }
  return 1.0;
}

// --- logistic clusters ------------------------------------------------------------

LogisticData generate_logistic(int m, int size, const Eigen::Vector3d& beta, double a_sd,
                               std::uint64_t seed) {
  require(m >= 1 && size >= 2, "logistic design needs m >= 1 clusters of size >= 2");
  require(a_sd >= 0.0, "cluster effect sd must be >= 0");
  LogisticData d;
  d.x = Eigen::VectorXd::LinSpaced(size, 0.0, 1.0);
  const Eigen::VectorXd g = (beta[0] + beta[1] * d.x.array() + beta[2] * d.x.array().square()).matrix();
  d.a.resize(m);
  d.clusters.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    Rng rng = split_rng(seed, static_cast<std::uint64_t>(i));
    d.a[i] = a_sd > 0.0 ? std::normal_distribution<double>(0.0, a_sd)(rng) : 0.0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto& c = d.clusters[static_cast<std::size_t>(i)];
    c.id = "c" + std::to_string(i);
    c.unit.resize(static_cast<std::size_t>(size));
    c.y.resize(static_cast<std::size_t>(size));
    for (int k = 0; k < size; ++k) {
      const double eta = g[k] + d.a[i];
      const double p = 1.0 / (1.0 + std::exp(-eta));
      c.unit[static_cast<std::size_t>(k)] = k;
      c.y[static_cast<std::size_t>(k)] = u(rng) < p ? 1 : 0;
    }
  }
  return d;
}

DesignFn quadratic_design(Eigen::VectorXd x, bool drop_intercept) {
  return [x = std::move(x), drop_intercept](int unit, Eigen::Ref<Eigen::VectorXd> row) {
    const double v = x[unit];
    if (drop_intercept) {
      row << v, v * v;
    } else {
      row << 1.0, v, v * v;
    }
  };
}

// --- synthetic surfaces --------------------------------------------------------

ContactMask sole_silhouette(GridDims grid) {
  ContactMask m = ContactMask::Zero(grid.height, grid.width);
  for (int r = 0; r < grid.height; ++r) {
    const double v = (r + 0.5) / grid.height;
    const double z = (v - 0.5) / 0.5;
    const double taper = std::sqrt(std::max(0.0, 1.0 - z * z * z * z));
    // Narrower waist under the arch.
    const double half = (0.47 - 0.12 * std::exp(-std::pow((v - 0.62) / 0.12, 2))) * taper;
    for (int c = 0; c < grid.width; ++c) {
      const double u = (c + 0.5) / grid.width;
      if (std::abs(u - 0.5) <= half) m(r, c) = 1;
    }
  }
  return m;
}

ContactMask synthetic_contact(GridDims grid, double coverage, Rng& rng) {
  require(coverage > 0.0, "coverage must be positive");
  const ContactMask sil = sole_silhouette(grid);
  if (coverage >= 1.0) return sil;
  std::vector<int> inside;
  for (int k = 0; k < static_cast<int>(grid.size()); ++k) {
    if (sil(k / grid.width, k % grid.width)) inside.push_back(k);
  }
  require(!inside.empty(), "grid too small for a sole silhouette");
  const auto target = static_cast<long>(std::ceil(coverage * static_cast<double>(inside.size())));
  ContactMask m = ContactMask::Zero(grid.height, grid.width);
  long covered = 0;
  std::uniform_int_distribution<std::size_t> pick(0, inside.size() - 1);
  std::uniform_real_distribution<double> rad(0.04, 0.12);
  while (covered < target) {
    const int k = inside[pick(rng)];
    const int r0 = k / grid.width, c0 = k % grid.width;
    const double rr = rad(rng) * grid.width;
    const int span = static_cast<int>(std::ceil(rr));
    for (int r = std::max(0, r0 - span); r <= std::min(grid.height - 1, r0 + span); ++r) {
      for (int c = std::max(0, c0 - span); c <= std::min(grid.width - 1, c0 + span); ++c) {
        if (!sil(r, c) || m(r, c)) continue;
        const double dr = r - r0, dc = c - c0;
        if (dr * dr + dc * dc <= rr * rr) {
          m(r, c) = 1;
          ++covered;
        }
      }
    }
  }
  return m;
}

namespace {

double shoe_coverage(double mean, double spread, Rng& rng) {
  if (mean >= 1.0 && spread <= 0.0) return 1.0;
  const double lo = mean - 0.5 * spread, hi = mean + 0.5 * spread;
  const double c = spread > 0.0 ? std::uniform_real_distribution<double>(lo, hi)(rng) : mean;
  return std::clamp(c, 0.05, 1.0);
}

long poisson(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<long>(mean)(rng);
}

}  // namespace

Population make_population(const SurfaceSpec& spec, const Partition& partition,
                           const Eigen::VectorXd& lambda) {
  require(spec.shoes >= 1, "population needs at least one shoe");
  require(partition.grid == spec.grid, "population grid does not match the partition");
  require(lambda.size() == partition.cell_count(), "lambda length does not match the partition");
  require(spec.base_var_a > 0.0, "base Var(a) must be positive");
  Population pop;
  pop.partition = partition;
  const Eigen::VectorXd area = partition.cell_area();
  std::vector<double> n(static_cast<std::size_t>(spec.shoes));
  for (int i = 0; i < spec.shoes; ++i) {
    Rng rng = split_rng(spec.seed, static_cast<std::uint64_t>(i));
    const double cov = shoe_coverage(spec.coverage, spec.coverage_spread, rng);
    const ContactMask mask = synthetic_contact(spec.grid, cov, rng);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(partition.cell_count());
    for (int k = 0; k < static_cast<int>(spec.grid.size()); ++k) {
      if (mask(k / spec.grid.width, k % spec.grid.width)) s[partition.label[k]] += 1.0;
    }
    s = s.cwiseQuotient(area);
    const double a = std::gamma_distribution<double>(1.0 / spec.base_var_a, spec.base_var_a)(rng);
    n[static_cast<std::size_t>(i)] = static_cast<double>(poisson(a * s.dot(lambda), rng));
    pop.s_area.push_back(std::move(s));
  }
  const double mean = std::accumulate(n.begin(), n.end(), 0.0) / static_cast<double>(n.size());
  require(mean > 0.0, "population has no RACs");
  for (double v : n) pop.empirical_a.push_back(v / mean);
  return pop;
}

std::vector<ShoeRecord> generate_region_given_a(std::span<const Eigen::VectorXd> s_area,
                                                const Eigen::VectorXd& lambda,
                                                std::span<const double> a, Rng& rng) {
  require(a.size() == s_area.size(), "one a per shoe required");
  require((lambda.array() >= 0.0).all(), "lambda must be non-negative");
  std::vector<ShoeRecord> out;
  out.reserve(s_area.size());
  for (std::size_t i = 0; i < s_area.size(); ++i) {
    require(s_area[i].size() == lambda.size(), "contact vector length does not match lambda");
    ShoeRecord r;
    r.shoe_id = "s" + std::to_string(i);
    r.s_area = s_area[i];
    r.counts.resize(lambda.size());
    for (Eigen::Index j = 0; j < lambda.size(); ++j) {
      r.counts[j] = static_cast<int>(poisson(lambda[j] * s_area[i][j] * a[i], rng));
    }
    r.total = r.counts.sum();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ShoeRecord> generate_region(std::span<const Eigen::VectorXd> s_area,
                                        const Eigen::VectorXd& lambda, const ALaw& law,
                                        std::uint64_t seed, std::span<const double> pool) {
  validate(law);
  Rng rng = split_rng(seed, 0);
  std::vector<double> a(s_area.size());
  for (auto& v : a) v = draw_a(law, rng, pool);
  return generate_region_given_a(s_area, lambda, a, rng);
}

Eigen::MatrixXd synthetic_intensity(GridDims grid) {
  const ContactMask sil = sole_silhouette(grid);
  Eigen::MatrixXd f(grid.height, grid.width);
  for (int r = 0; r < grid.height; ++r) {
    const double v = (r + 0.5) / grid.height;
    for (int c = 0; c < grid.width; ++c) {
      const double u = (c + 0.5) / grid.width;
      const double ball = std::exp(-(std::pow((v - 0.28) / 0.09, 2) + std::pow((u - 0.45) / 0.2, 2)));
      const double heel = std::exp(-(std::pow((v - 0.86) / 0.07, 2) + std::pow((u - 0.5) / 0.18, 2)));
      const double toe = std::exp(-(std::pow((v - 0.08) / 0.06, 2) + std::pow((u - 0.4) / 0.15, 2)));
      f(r, c) = 0.5 + 1.2 * ball + 1.0 * heel + 0.4 * toe;
    }
  }
  double s = 0.0;
  long n = 0;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    if (sil(k)) {
      s += f(k);
      ++n;
    }
  }
  return f / (s / static_cast<double>(n));
}

std::vector<StandardShoe> generate_shoes(const GenerateParams& p) {
  require(p.shoes >= 1, "number of shoes must be >= 1");
  require(p.avg_racs > 0.0, "average RAC count must be positive");
  require(p.coverage > 0.0 && p.coverage <= 1.0, "coverage must be in (0, 1]");
  require(p.grid.height > 0 && p.grid.width > 0, "grid dimensions must be positive");
  validate(p.a_law);
  const Eigen::MatrixXd f = synthetic_intensity(p.grid);
  std::vector<StandardShoe> shoes(static_cast<std::size_t>(p.shoes));
  std::vector<Rng> rngs;
  std::vector<double> a(shoes.size());
  double expected = 0.0;
  const double spread = p.coverage >= 1.0 ? 0.0 : p.coverage_spread;
  for (int i = 0; i < p.shoes; ++i) {
    rngs.push_back(split_rng(p.seed, static_cast<std::uint64_t>(i)));
    auto& s = shoes[static_cast<std::size_t>(i)];
    s.shoe_id = "shoe" + std::to_string(i + 1);
    const double cov = shoe_coverage(p.coverage, spread, rngs.back());
    s.S = synthetic_contact(p.grid, cov, rngs.back());
    s.n = CountMatrix::Zero(p.grid.height, p.grid.width);
    a[static_cast<std::size_t>(i)] = draw_a(p.a_law, rngs.back());
    for (Eigen::Index k = 0; k < f.size(); ++k) {
      if (s.S(k)) expected += f(k);
    }
  }
  const double scale = p.avg_racs / (expected / p.shoes * p.a_law.mean());
  for (std::size_t i = 0; i < shoes.size(); ++i) {
    auto& s = shoes[i];
    for (Eigen::Index k = 0; k < f.size(); ++k) {
      if (s.S(k)) s.n(k) = static_cast<int>(poisson(scale * a[i] * f(k), rngs[i]));
    }
  }
  return shoes;
}

// --- scenarios ------------------------------------------------------------------

const char* to_string(Design d) {
  return d == Design::kLogisticCluster ? "logistic_cluster" : "region_poisson";
}

Design design_from_string(const std::string& s) {
  if (s == "logistic_cluster") return Design::kLogisticCluster;
  if (s == "region_poisson") return Design::kRegionPoisson;
  fail(ErrorKind::kInvalidInput, "unknown design '" + s + "'");
}

Partition scenario_partition(const std::string& name, GridDims grid) {
  if (name == "expert") return expert_partition(RegionLayout{}, grid);
  if (name.rfind("blocks:", 0) == 0) {
    int r = 0, c = 0;
    char x = 0;
    std::istringstream is(name.substr(7));
    if ((is >> r >> x >> c) && x == 'x') return block_partition(grid, r, c);
  }
  fail(ErrorKind::kInvalidInput, "unknown partition '" + name + "' (expected expert or blocks:RxC)");
}

void validate(const Scenario& sc) {
  require(!sc.scenario_id.empty(), "scenario id must not be empty");
  require(sc.replications >= 1 && sc.full_replications >= 1, "replications must be >= 1");
  validate(sc.a_law);
  if (sc.design == Design::kLogisticCluster) {
    require(sc.a_law.kind == ALawKind::kNormal, "logistic design uses a normal a law");
    require(sc.clusters >= 1 && sc.cluster_size >= 2, "logistic design needs clusters of size >= 2");
    require(sc.controls_per_cluster >= 0, "controls per cluster must be >= 0");
    require(!sc.schemes.empty(), "at least one sampling scheme is required");
  } else {
    require(sc.shoes >= 1, "region design needs at least one shoe");
    require(sc.lambda.size() >= 1 && (sc.lambda.array() >= 0.0).all(),
            "region design needs a non-negative lambda vector");
    require(sc.a_law.kind != ALawKind::kNormal, "region design needs a positive a law");
    require(sc.resample_shoes || sc.shoes == sc.surface.shoes,
            "without resampling the shoe count must equal the population size");
    const Partition p = scenario_partition(sc.partition, sc.surface.grid);
    require(p.cell_count() == sc.lambda.size(), "lambda length does not match the partition");
  }
}

const MethodStats& ComparisonTable::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  fail(ErrorKind::kLookup, "method '" + name + "' not in comparison table");
}

MethodStats summarize(std::string method, const std::vector<Eigen::VectorXd>& estimates,
                      const Eigen::VectorXd& truth) {
  MethodStats st;
  st.method = std::move(method);
  const Eigen::Index j = truth.size();
  st.successes = static_cast<int>(estimates.size());
  if (estimates.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    st.mean_estimate = st.bias = st.variance = st.mse = Eigen::VectorXd::Constant(j, nan);
    st.mean_abs_bias = st.mean_mse = nan;
    return st;
  }
  const double r = static_cast<double>(estimates.size());
  st.mean_estimate = Eigen::VectorXd::Zero(j);
  for (const auto& e : estimates) st.mean_estimate += e;
  st.mean_estimate /= r;
  st.variance = Eigen::VectorXd::Zero(j);
  st.mse = Eigen::VectorXd::Zero(j);
  for (const auto& e : estimates) {
    st.variance += (e - st.mean_estimate).cwiseAbs2();
    st.mse += (e - truth).cwiseAbs2();
  }
  st.variance /= r;
  st.mse /= r;
  st.bias = st.mean_estimate - truth;
  st.mean_abs_bias = st.bias.cwiseAbs().mean();
  st.mean_mse = st.mse.mean();
  return st;
}

namespace {

struct Collector {
  std::string name;
  std::vector<Eigen::VectorXd> est;
  int failures = 0;
  std::vector<std::string> messages;

  template <typename F>
  void run(int rep, F&& f) {
    try {
      Eigen::VectorXd v = f();
      if (!v.allFinite()) fail(ErrorKind::kInvalidState, "non-finite estimate");
      est.push_back(std::move(v));
    } catch (const std::exception& e) {
      ++failures;
      if (messages.size() < 5) messages.push_back("rep " + std::to_string(rep) + ": " + e.what());
    }
  }
};

ComparisonTable finish(const Scenario& sc, int reps, std::vector<std::string> cells,
                       const Eigen::VectorXd& truth, std::vector<Collector>& cols) {
  ComparisonTable t;
  t.scenario_id = sc.scenario_id;
  t.replications = reps;
  t.cells = std::move(cells);
  t.truth = truth;
  for (auto& c : cols) {
    MethodStats st = summarize(c.name, c.est, truth);
    st.failures = c.failures;
    st.failure_messages = c.messages;
    t.methods.push_back(std::move(st));
  }
  return t;
}

ComparisonTable run_logistic(const Scenario& sc, int reps) {
  const Eigen::Vector2d truth(sc.beta[1], sc.beta[2]);
  std::vector<Collector> cols;
  for (auto s : sc.schemes) {
    cols.push_back({std::string("re_") + to_string(s), {}, 0, {}});
    cols.push_back({std::string("cml_") + to_string(s), {}, 0, {}});
  }
  GlmmOptions gopt;
  gopt.quadrature_order = sc.quadrature_order;
  gopt.compute_covariance = false;
  ClogitOptions copt;
  copt.compute_covariance = false;
  copt.optim.grad_tol = 1e-7;
  for (int rep = 0; rep < reps; ++rep) {
    const std::uint64_t rep_seed = mix_seed(sc.seed ^ mix_seed(static_cast<std::uint64_t>(rep)));
    const LogisticData data = generate_logistic(sc.clusters, sc.cluster_size, sc.beta, sc.a_law.p1,
                                                rep_seed);
    for (std::size_t k = 0; k < sc.schemes.size(); ++k) {
      const Subsample sub = subsample(data.clusters, sc.schemes[k],
                                      {sc.controls_per_cluster}, mix_seed(rep_seed + k + 1));
      const std::vector<double> off = offsets(sub.meta);
      std::vector<ClusterSample> keep;
      std::vector<double> keep_off;
      for (std::size_t i = 0; i < sub.clusters.size(); ++i) {
        if (sub.clusters[i].size() == 0 || !std::isfinite(off[i])) continue;
        keep.push_back(sub.clusters[i]);
        keep_off.push_back(off[i]);
      }
      cols[2 * k].run(rep, [&] {
        const auto strata = build_strata(keep, keep_off, 3, quadratic_design(data.x, false));
        const GlmmFit f = fit_glmm(strata, gopt);
        return Eigen::VectorXd(f.beta.tail(2));
      });
      cols[2 * k + 1].run(rep, [&] {
        const auto strata = build_strata(keep, keep_off, 2, quadratic_design(data.x, true));
        return fit_clogit(strata, copt).beta;
      });
    }
  }
  return finish(sc, reps, {"beta1", "beta2"}, truth, cols);
}

ComparisonTable run_region(const Scenario& sc, int reps) {
  const Partition part = scenario_partition(sc.partition, sc.surface.grid);
  const Population pop = make_population(sc.surface, part, sc.lambda);
  std::vector<Collector> cols{{"naive", {}, 0, {}}, {"random_effects", {}, 0, {}}, {"cml", {}, 0, {}}};
  RegionReOptions ropt;
  ropt.compute_covariance = false;
  CmlRegionOptions copt;
  copt.compute_covariance = false;
  copt.optim.grad_tol = 1e-9;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng = split_rng(sc.seed, static_cast<std::uint64_t>(rep));
    std::vector<Eigen::VectorXd> s;
    std::vector<double> a;
    if (sc.resample_shoes) {
      std::uniform_int_distribution<std::size_t> pick(0, pop.s_area.size() - 1);
      for (int i = 0; i < sc.shoes; ++i) s.push_back(pop.s_area[pick(rng)]);
      for (int i = 0; i < sc.shoes; ++i) a.push_back(draw_a(sc.a_law, rng, pop.empirical_a));
    } else {
      s = pop.s_area;
      if (sc.a_law.kind == ALawKind::kEmpirical) {
        a = pop.empirical_a;
      } else {
        for (std::size_t i = 0; i < s.size(); ++i) a.push_back(draw_a(sc.a_law, rng));
      }
    }
    const auto recs = generate_region_given_a(s, sc.lambda, a, rng);
    std::optional<RegionFit> naive;
    cols[0].run(rep, [&] {
      naive = naive_region(recs);
      return naive->lambda_hat;
    });
    cols[1].run(rep, [&] { return fit_re_region(recs, ropt).lambda_hat; });
    cols[2].run(rep, [&] {
      if (!naive) fail(ErrorKind::kInvalidState, "no naive fit to rescale against");
      return rescale_cml(fit_cml_region(recs, copt), *naive).lambda_hat;
    });
  }
  std::vector<std::string> cells;
  for (Eigen::Index j = 0; j < sc.lambda.size(); ++j) cells.push_back(std::to_string(j + 1));
  return finish(sc, reps, cells, sc.lambda, cols);
}

}  // namespace

ComparisonTable run_scenario(const Scenario& sc, const RunOptions& opt) {
  validate(sc);
  const int reps = opt.replications ? *opt.replications
                                    : (opt.full ? sc.full_replications : sc.replications);
  require(reps >= 1, "replications must be >= 1");
  return sc.design == Design::kLogisticCluster ? run_logistic(sc, reps) : run_region(sc, reps);
}

std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> out;
  Eigen::VectorXd base14(14);
  base14 << 30, 26, 40, 44, 48, 36, 42, 46, 18, 22, 28, 30, 38, 34;

  auto region = [&](std::string id, std::string desc) {
    Scenario s;
    s.scenario_id = std::move(id);
    s.description = std::move(desc);
    s.design = Design::kRegionPoisson;
    s.replications = 100;
    s.full_replications = 500;
    s.seed = 20180 + out.size();
    s.lambda = base14;
    s.a_law = ALaw::empirical();
    return s;
  };

  out.push_back(region("scenario_00_baseline",
                       "baseline: 14 expert regions, empirical a_i = n_i / mean(n)"));
  {
    Scenario s = region("scenario_01_equal_lambda", "equal lambda_j = 32");
    s.lambda = Eigen::VectorXd::Constant(14, 32.0);
    out.push_back(s);
  }
  {
    Scenario s = region("scenario_02_half_small_half_large", "seven lambdas of 16, seven of 48");
    s.lambda.resize(14);
    for (int j = 0; j < 14; ++j) s.lambda[j] = j % 2 == 0 ? 16.0 : 48.0;
    out.push_back(s);
  }
  {
    Scenario s = region("scenario_03_one_large", "lambda 2.5 everywhere except one of 416");
    s.lambda = Eigen::VectorXd::Constant(14, 2.5);
    s.lambda[4] = 416.0;
    out.push_back(s);
  }
  {
    Scenario s = region("scenario_04_36_regions", "36 block regions (9 x 4)");
    s.partition = "blocks:9x4";
    const Partition p = scenario_partition(s.partition, s.surface.grid);
    const Eigen::MatrixXd f = synthetic_intensity(s.surface.grid);
    s.lambda.resize(36);
    for (int j = 0; j < 36; ++j) {
      double acc = 0.0;
      for (int k : p.cell_pixels(j)) acc += f(k / s.surface.grid.width, k % s.surface.grid.width);
      s.lambda[j] = std::round(32.0 * 100.0 * acc / p.cell_pixels(j).size()) / 100.0;
    }
    out.push_back(s);
  }
  for (int m : {500, 1000, 386}) {
    const std::string idx = m == 500 ? "05" : (m == 1000 ? "06" : "07");
    Scenario s = region("scenario_" + idx + "_resampled_" + std::to_string(m),
                        std::to_string(m) +
                            " shoes; contact surfaces and a_i resampled independently");
    s.shoes = m;
    s.resample_shoes = true;
    out.push_back(s);
  }
  {
    Scenario s = region("scenario_08_gamma_a", "a_i ~ gamma(shape 1/3, scale 3)");
    s.a_law = ALaw::gamma(1.0 / 3.0, 3.0);
    out.push_back(s);
  }
  {
    Scenario s = region("scenario_09_constant_a", "a_i = 1");
    s.a_law = ALaw::constant(1.0);
    out.push_back(s);
  }
  {
    Scenario s = region("scenario_10_uniform_a", "a_i ~ U(0, 2)");
    s.a_law = ALaw::uniform(0.0, 2.0);
    out.push_back(s);
  }
  {
    Scenario s = region("scenario_11_shifted_bernoulli_a", "a_i = 0.5 or 1.5 with probability 1/2");
    s.a_law = ALaw::shifted_bernoulli(0.5, 1.5, 0.5);
    out.push_back(s);
  }
  {
    Scenario s;
    s.scenario_id = "subsampling_study";
    s.description = "case-control sub-sampling comparison for the clustered logistic model";
    s.design = Design::kLogisticCluster;
    s.replications = 50;
    s.full_replications = 300;
    s.seed = 61;
    s.clusters = 100;
    s.cluster_size = 200;
    s.a_law = ALaw::normal(0.75);
    out.push_back(s);
  }
  return out;
}

}  // namespace racint
