#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "racint/error.hpp"
#include "racint/estimators_region.hpp"

using namespace racint;

namespace {

ShoeRecord rec(std::initializer_list<double> s, std::initializer_list<int> n) {
  ShoeRecord r;
  r.shoe_id = "r";
  r.s_area.resize(s.size());
  std::copy(s.begin(), s.end(), r.s_area.data());
  r.counts.resize(n.size());
  std::copy(n.begin(), n.end(), r.counts.data());
  r.total = r.counts.sum();
  return r;
}

// m shoes sharing one contact vector, gamma wear, Poisson counts.
std::vector<ShoeRecord> equal_surface_data(Rng& rng, int m, const Eigen::VectorXd& s,
                                           const Eigen::VectorXd& lambda) {
  std::gamma_distribution<double> ga(2.0, 0.5);
  std::vector<ShoeRecord> out;
  for (int i = 0; i < m; ++i) {
    ShoeRecord r;
    r.shoe_id = std::to_string(i);
    r.s_area = s;
    r.counts.resize(s.size());
    const double a = ga(rng);
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      std::poisson_distribution<int> p(lambda[j] * s[j] * a);
      r.counts[j] = p(rng);
    }
    r.total = r.counts.sum();
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("naive region examples") {
  const std::vector<ShoeRecord> one{rec({2, 4}, {4, 4})};
  const RegionFit f = naive_region(one);
  CHECK(f.lambda_hat[0] == 2.0);
  CHECK(f.lambda_hat[1] == 1.0);

  const std::vector<ShoeRecord> three{rec({1}, {2}), rec({2}, {0}), rec({3}, {3})};
  CHECK(naive_region(three).lambda_hat[0] == doctest::Approx(1.0));

  // a single shoe still gives a finite variance with |m_j| = 1
  const NaiveVariance v = var_naive(one, f.lambda_hat);
  CHECK(v.var.allFinite());
  CHECK(v.var_a >= 0.0);
  // N = 8, mu = 8 -> U = 56 / 64, Var(a) = -1/8 clamped to 0
  CHECK(v.var_a_raw == doctest::Approx(56.0 / 64.0 - 1.0));
  CHECK(v.clamped);
  CHECK(v.var[0] == doctest::Approx(2.0 / 2.0));

  const std::vector<ShoeRecord> untouched{rec({1, 0}, {1, 0})};
  CHECK(std::isnan(naive_region(untouched).lambda_hat[1]));
  const std::vector<ShoeRecord> mismatched{rec({1, 1}, {1, 0}), rec({1}, {1})};
  CHECK_THROWS_AS(naive_region(mismatched), Error);
}

TEST_CASE("Var(a) moment estimate vanishes without wear variation") {
  Rng rng = split_rng(31, 0);
  const Eigen::Vector3d lambda(5.0, 10.0, 20.0);
  std::vector<ShoeRecord> shoes;
  for (int i = 0; i < 2000; ++i) {
    ShoeRecord r;
    r.s_area = oracle::random_vector(rng, 3, 0.3, 1.0);
    r.counts.resize(3);
    for (int j = 0; j < 3; ++j) {
      std::poisson_distribution<int> p(lambda[j] * r.s_area[j]);
      r.counts[j] = p(rng);
    }
    r.total = r.counts.sum();
    shoes.push_back(r);
  }
  const RegionFit f = naive_region(shoes);
  CHECK(std::abs(var_naive(shoes, f.lambda_hat).var_a_raw) < 0.05);
}

TEST_CASE("E(U) = Var(a) + 1") {
  Rng rng = split_rng(32, 0);
  std::gamma_distribution<double> ga(2.0, 0.5);  // Var(a) = 0.5
  const Eigen::VectorXd lambda = Eigen::Vector2d(10.0, 24.0);
  std::vector<ShoeRecord> shoes;
  for (int i = 0; i < 10000; ++i) {
    ShoeRecord r = rec({1, 1}, {0, 0});
    const double a = ga(rng);
    for (int j = 0; j < 2; ++j) {
      std::poisson_distribution<int> p(lambda[j] * a);
      r.counts[j] = p(rng);
    }
    r.total = r.counts.sum();
    shoes.push_back(r);
  }
  CHECK(oracle::rel_err(estimate_var_a(shoes, lambda) + 1.0, 1.5) <= 0.02);
}

TEST_CASE("gamma closed form matches numeric integration") {
  Rng rng = split_rng(33, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const int J = 2 + rep % 4;
    const ShoeRecord r = oracle::random_record(rng, J, 20.0 + 5 * rep);
    const Eigen::VectorXd lambda = oracle::random_vector(rng, J, 2.0, 12.0);
    const double v = 0.1 + 0.2 * rep;
    CHECK(oracle::rel_err(gamma_shoe_loglik(r, lambda, v), oracle::gamma_marginal_numeric(r, lambda, v)) <=
          1e-8);
  }
}

TEST_CASE("lognormal quadrature is close to the gamma marginal with the same variance for small v") {
  // both laws concentrate at a = 1 as v -> 0, where each tends to the Poisson value
  Rng rng = split_rng(34, 0);
  const ShoeRecord r = oracle::random_record(rng, 3, 25.0);
  const Eigen::VectorXd lambda = Eigen::Vector3d(8.0, 9.0, 10.0);
  const double pois = poisson_shoe_loglik(r, lambda, 1.0);
  CHECK(lognormal_shoe_loglik(r, lambda, 1e-6, 21) == doctest::Approx(pois).epsilon(1e-4));
  CHECK(gamma_shoe_loglik(r, lambda, 1e-6) == doctest::Approx(pois).epsilon(1e-4));
}

TEST_CASE("region likelihood gradients match central differences") {
  Rng rng = split_rng(35, 0);
  for (int point = 0; point < 10; ++point) {
    const int J = 3 + point % 3;
    const ShoeRecord r = oracle::random_record(rng, J, 30.0);
    const Eigen::VectorXd lambda = oracle::random_vector(rng, J, 3.0, 12.0);
    const double v = 0.2 + 0.1 * point;

    Eigen::VectorXd g;
    gamma_shoe_loglik(r, lambda, v, &g);
    Eigen::VectorXd x(J + 1);
    x << lambda.array().log().matrix(), std::log(v);
    auto fg = [&](const Eigen::VectorXd& p) {
      return gamma_shoe_loglik(r, p.head(J).array().exp().matrix(), std::exp(p[J]));
    };
    CHECK(oracle::rel_err(g, oracle::central_gradient(fg, x)) <= 1e-4);

    Eigen::VectorXd gl;
    lognormal_shoe_loglik(r, lambda, v, 21, &gl);
    auto fl = [&](const Eigen::VectorXd& p) {
      return lognormal_shoe_loglik(r, p.head(J).array().exp().matrix(), std::exp(p[J]), 21);
    };
    CHECK(oracle::rel_err(gl, oracle::central_gradient(fl, x)) <= 1e-4);

    const std::vector<ShoeRecord> shoes = oracle::random_region_data(rng, 8, J);
    const Eigen::VectorXd sc = cml_region_score(shoes, lambda);
    auto fc = [&](const Eigen::VectorXd& l) { return cml_region_loglik(shoes, l); };
    CHECK(oracle::rel_err(sc, oracle::central_gradient(fc, lambda)) <= 1e-4);
  }
}

TEST_CASE("multinomial reduction matches enumeration over Poisson outcomes") {
  Rng rng = split_rng(36, 0);
  for (int J = 2; J <= 4; ++J) {
    for (int total = 0; total <= 4; ++total) {
      const Eigen::VectorXd s = oracle::random_vector(rng, J, 0.2, 2.0);
      const Eigen::VectorXd lambda = oracle::random_vector(rng, J, 0.1, 3.0);
      oracle::for_each_composition(J, total, [&](const Eigen::VectorXi& c) {
        const double got = std::exp(conditional_multinomial_logprob(c, s, lambda));
        CHECK(std::abs(got - oracle::conditional_multinomial_brute(c, s, lambda)) <= 1e-12);
      });
    }
  }
}

TEST_CASE("conditional likelihood is scale invariant") {
  Rng rng = split_rng(37, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const auto shoes = oracle::random_region_data(rng, 20, 5);
    const Eigen::VectorXd lambda = oracle::random_vector(rng, 5, 0.5, 4.0);
    const double c = std::exp(oracle::random_vector(rng, 1, -3.0, 3.0)[0]);
    const double l = cml_region_loglik(shoes, lambda);
    CHECK(std::abs(cml_region_loglik(shoes, c * lambda) - l) <= 1e-10 * std::max(1.0, std::abs(l)));
  }
}

TEST_CASE("CML examples and optimum") {
  const std::vector<ShoeRecord> sym{rec({1, 1}, {1, 1}), rec({1, 1}, {2, 2})};
  const RegionFit f = fit_cml_region(sym);
  CHECK(f.lambda_hat[1] / f.lambda_hat[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.lambda_hat[0] == 1.0);
  CHECK(f.reference_region == 0);

  const std::vector<ShoeRecord> grid{rec({1, 1}, {1, 0}), rec({1, 2}, {0, 2})};
  const RegionFit g = fit_cml_region(grid);
  const double oracle_r = oracle::cml_ratio_grid_search(grid, 1e-4, 50.0);
  CHECK(std::abs(g.lambda_hat[1] / g.lambda_hat[0] - oracle_r) <= 1e-3);

  Rng rng = split_rng(38, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto shoes = oracle::random_region_data(rng, 30, 3 + rep % 5);
    const RegionFit c = fit_cml_region(shoes);
    REQUIRE(c.score_residual);
    CHECK(*c.score_residual <= 1e-8);
    CHECK(cml_region_score(shoes, c.lambda_hat).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("zero-count regions are boundary estimates") {
  const std::vector<ShoeRecord> shoes{rec({1, 1, 1}, {3, 0, 2}), rec({1, 2, 1}, {1, 0, 4}),
                                      rec({2, 1, 1}, {5, 0, 1})};
  for (const RegionFit& f : {fit_cml_region(shoes), fit_re_region(shoes)}) {
    CHECK(f.lambda_hat[1] == 0.0);
    REQUIRE(f.at_boundary.size() == 3);
    CHECK(f.at_boundary[1]);
    CHECK_FALSE(f.at_boundary[0]);
    const auto ci = region_ci(f, 0.95, shoes);
    CHECK(ci[1].lo == 0.0);
    CHECK(ci[1].hi == doctest::Approx(-std::log(0.05) / 4.0));
  }
}

TEST_CASE("rescaling") {
  RegionFit cml;
  cml.method = Method::kCml;
  cml.lambda_hat = Eigen::Vector2d(1.0, 3.0);
  RegionFit naive;
  naive.lambda_hat = Eigen::Vector2d(2.0, 6.0);
  const RegionFit r = rescale_cml(cml, naive);
  CHECK(*r.rescale_constant == 2.0);
  CHECK(r.lambda_hat == Eigen::Vector2d(2.0, 6.0));
  const RegionFit same = rescale_cml(naive, naive);
  CHECK(*same.rescale_constant == 1.0);
  RegionFit zero = naive;
  zero.lambda_hat.setZero();
  CHECK_THROWS_AS(rescale_cml(zero, naive), Error);

  Rng rng = split_rng(39, 0);
  const auto shoes = oracle::random_region_data(rng, 40, 6);
  const RegionFit n = naive_region(shoes);
  const RegionFit c = rescale_cml(fit_cml_region(shoes), n);
  CHECK(std::abs(c.lambda_hat.mean() - n.lambda_hat.mean()) <= 1e-12 * n.lambda_hat.mean());
}

TEST_CASE("equal contact surfaces: all estimators agree") {
  Rng rng = split_rng(40, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const int J = 4 + rep;
    const Eigen::VectorXd s = oracle::random_vector(rng, J, 0.5, 3.0);
    const Eigen::VectorXd lambda = oracle::random_vector(rng, J, 2.0, 10.0);
    const auto shoes = equal_surface_data(rng, 60, s, lambda);
    const int m = static_cast<int>(shoes.size());
    Eigen::VectorXd n_dot = Eigen::VectorXd::Zero(J);
    for (const auto& r : shoes) n_dot += r.counts.cast<double>();
    const Eigen::VectorXd closed = n_dot.cwiseQuotient(s) / m;

    const RegionFit naive = naive_region(shoes);
    const RegionFit cml = rescale_cml(fit_cml_region(shoes), naive);
    const RegionFit gam = fit_re_region(shoes);
    RegionReOptions lo;
    lo.prior = Prior::kLognormal;
    const RegionFit logn = fit_re_region(shoes, lo);

    CHECK(oracle::rel_err(naive.lambda_hat, closed) <= 1e-12);
    CHECK(oracle::rel_err(cml.lambda_hat, closed) <= 1e-10);
    CHECK(oracle::rel_err(gam.lambda_hat, closed) <= 1e-10);
    CHECK(std::abs(gam.lambda_hat.dot(s) - n_dot.sum() / m) <= 1e-10 * n_dot.sum() / m);
    const Eigen::VectorXd ratio_logn = logn.lambda_hat / logn.lambda_hat[0];
    CHECK(oracle::rel_err(ratio_logn, closed / closed[0]) <= 1e-4);
  }
}

TEST_CASE("variance-free fits cannot give intervals") {
  RegionFit f;
  f.lambda_hat = Eigen::Vector2d(1.0, 2.0);
  const std::vector<ShoeRecord> none;
  CHECK_THROWS_AS(region_ci(f, 0.95, none), Error);
  f.covariance = Eigen::Matrix2d::Zero();
  const auto ci = region_ci(f, 0.95, none);
  CHECK(ci[1].lo == 2.0);
  CHECK(ci[1].hi == 2.0);
  CHECK_THROWS_AS(region_ci(f, 1.5, none), Error);
}

TEST_CASE("random-effects fit beats naive under strong overdispersion on average") {
  Rng rng = split_rng(41, 0);
  const Eigen::VectorXd lambda = Eigen::VectorXd::Constant(6, 6.0);
  double mse_re = 0.0, mse_naive = 0.0;
  for (int rep = 0; rep < 30; ++rep) {
    std::gamma_distribution<double> ga(1.0, 1.0);
    std::vector<ShoeRecord> shoes;
    for (int i = 0; i < 80; ++i) {
      ShoeRecord r;
      r.s_area = oracle::random_vector(rng, 6, 0.05, 1.0);
      r.counts.resize(6);
      const double a = ga(rng);
      for (int j = 0; j < 6; ++j) {
        std::poisson_distribution<int> p(lambda[j] * r.s_area[j] * a);
        r.counts[j] = p(rng);
      }
      r.total = r.counts.sum();
      shoes.push_back(r);
    }
    mse_re += (fit_re_region(shoes).lambda_hat - lambda).squaredNorm();
    mse_naive += (naive_region(shoes).lambda_hat - lambda).squaredNorm();
  }
  CHECK(mse_re < mse_naive);
}
