#include <doctest.h>

#include <cmath>
#include <vector>

#include "racint/error.hpp"
#include "racint/io.hpp"
#include "racint/simulation.hpp"

using namespace racint;

TEST_CASE("wear factor laws have mean one") {
  for (const ALaw& law : {ALaw::gamma(1.0 / 3.0, 3.0), ALaw::gamma(2.0, 0.5), ALaw::uniform(0.0, 2.0),
                          ALaw::shifted_bernoulli(0.5, 1.5, 0.5), ALaw::constant(1.0)}) {
    CHECK(law.mean() == doctest::Approx(1.0));
    Rng rng = split_rng(1, static_cast<std::uint64_t>(law.kind));
    double sum = 0.0, sq = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
      const double a = draw_a(law, rng);
      CHECK_MESSAGE(a >= 0.0, to_string(law.kind));
      sum += a;
      sq += a * a;
    }
    const double mean = sum / n, var = sq / n - mean * mean;
    CHECK(std::abs(mean - 1.0) < 5.0 * std::sqrt(law.variance() / n) + 1e-12);
    CHECK(var == doctest::Approx(law.variance()).epsilon(0.1).scale(0.01));
  }
  CHECK(ALaw::gamma(1.0 / 3.0, 3.0).variance() == doctest::Approx(3.0));
  CHECK_THROWS_AS(validate(ALaw::uniform(2.0, 1.0)), Error);
  CHECK_THROWS_AS(validate(ALaw::gamma(-1.0, 1.0)), Error);
}

TEST_CASE("logistic generator") {
  const LogisticData zero = generate_logistic(10, 50, Eigen::Vector3d(-30.0, 0.0, 0.0), 0.5, 3);
  long cases = 0;
  for (const auto& c : zero.clusters) cases += c.cases();
  CHECK(cases == 0);
  CHECK(zero.x[0] == 0.0);
  CHECK(zero.x[49] == doctest::Approx(1.0));

  const LogisticData a = generate_logistic(10, 50, Eigen::Vector3d(-1.0, 1.0, -1.0), 0.5, 3);
  const LogisticData b = generate_logistic(10, 50, Eigen::Vector3d(-1.0, 1.0, -1.0), 0.5, 3);
  for (std::size_t i = 0; i < a.clusters.size(); ++i) CHECK(a.clusters[i].y == b.clusters[i].y);
  CHECK(a.a == b.a);
}

TEST_CASE("region generator") {
  const std::vector<Eigen::VectorXd> s(50, Eigen::VectorXd::Ones(3));
  const auto none = generate_region(s, Eigen::VectorXd::Zero(3), ALaw::gamma(2.0, 0.5), 4);
  for (const auto& r : none) CHECK(r.total == 0);

  const std::vector<Eigen::VectorXd> one(10000, Eigen::VectorXd::Ones(1));
  const auto recs = generate_region(one, Eigen::VectorXd::Constant(1, 34.0), ALaw::constant(1.0), 5);
  double sum = 0.0;
  for (const auto& r : recs) sum += static_cast<double>(r.total);
  CHECK(std::abs(sum / 1e4 - 34.0) < 3.0 * std::sqrt(34.0 / 1e4));
}

TEST_CASE("synthetic shoes") {
  GenerateParams p;
  p.shoes = 60;
  p.grid = {99, 77};
  p.avg_racs = 34.0;
  const auto shoes = generate_shoes(p);
  REQUIRE(shoes.size() == 60);
  double total = 0.0;
  for (const auto& s : shoes) {
    CHECK_NOTHROW(validate(s));
    total += static_cast<double>(s.total_racs());
  }
  // gamma(2, 0.5) wear: sd of the mean is about sqrt((34 + 34^2 / 2) / 60)
  CHECK(std::abs(total / 60 - 34.0) < 4.0 * std::sqrt((34.0 + 34.0 * 34.0 * 0.5) / 60.0));

  p.coverage = 1.0;
  p.coverage_spread = 0.0;
  p.shoes = 3;
  const auto full = generate_shoes(p);
  CHECK(full[0].S == full[1].S);
  CHECK(full[0].S == sole_silhouette(p.grid));
}

TEST_CASE("summaries are internally consistent") {
  std::vector<Eigen::VectorXd> est;
  const Eigen::Vector3d truth(1.0, 2.0, 3.0);
  Rng rng = split_rng(3, 0);
  std::normal_distribution<double> z;
  for (int r = 0; r < 37; ++r) est.push_back(truth + Eigen::Vector3d(z(rng), z(rng) + 0.3, z(rng)));
  const MethodStats s = summarize("m", est, truth);
  CHECK(s.successes == 37);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(s.mse[j] - (s.bias[j] * s.bias[j] + s.variance[j])) <= 1e-12 * s.mse[j]);
  }
  CHECK(s.mean_mse == doctest::Approx(s.mse.mean()));
}

TEST_CASE("scenario runs are reproducible and consistent") {
  auto all = builtin_scenarios();
  const Scenario& sc = all[1];
  const ComparisonTable a = run_scenario(sc, {3, false});
  const ComparisonTable b = run_scenario(sc, {3, false});
  CHECK(to_json(a).dump() == to_json(b).dump());
  REQUIRE(a.methods.size() == 3);
  for (const auto& m : a.methods) {
    CHECK(m.failures == 0);
    for (Eigen::Index j = 0; j < m.mse.size(); ++j) {
      CHECK(std::abs(m.mse[j] - (m.bias[j] * m.bias[j] + m.variance[j])) <= 1e-12 * m.mse[j]);
    }
  }
  CHECK_THROWS_AS(a.method("nope"), Error);
}

TEST_CASE("naive is consistent with constant wear and many shoes") {
  Scenario sc = builtin_scenarios()[9];  // constant a
  sc.lambda = Eigen::VectorXd::Constant(14, 400.0);
  sc.shoes = 1000;
  sc.resample_shoes = true;
  const ComparisonTable t = run_scenario(sc, {1, false});
  CHECK((t.method("naive").bias.cwiseAbs() / 400.0).maxCoeff() < 0.05);
}

TEST_CASE("scenario registry") {
  const auto all = builtin_scenarios();
  REQUIRE(all.size() == 13);
  int region = 0;
  for (const auto& s : all) {
    CHECK_NOTHROW(validate(s));
    if (s.design == Design::kRegionPoisson) ++region;
  }
  CHECK(region == 12);
  CHECK(all[3].lambda.maxCoeff() == 416.0);
  CHECK(all[4].lambda.size() == 36);
  CHECK(all[5].shoes == 500);
  CHECK(all[6].shoes == 1000);
  CHECK(all[7].shoes == 386);
  CHECK(all[10].a_law.kind == ALawKind::kUniform);

  // the shipped files are exactly the registry
  for (const auto& s : all) {
    const Scenario f = read_scenario(fs::path(RACINT_SOURCE_DIR) / "scenarios" / (s.scenario_id + ".json"));
    CHECK(to_json(f).dump() == to_json(s).dump());
  }
}
