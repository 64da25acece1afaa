#include <doctest.h>

#include "cli_harness.hpp"
#include "racint/io.hpp"

TEST_CASE("every command succeeds and reruns are byte-identical") {
  const auto in = cli::work_dir("cli_in");
  cli::prepare_inputs(in);
  REQUIRE(cli::fs::exists(in / "shoes.csv"));
  const auto a = cli::work_dir("cli_a"), b = cli::work_dir("cli_b");
  const auto fa = cli::run_every_command(in, a);
  for (const auto& c : fa) MESSAGE("failed: " << c);
  CHECK(fa.empty());
  CHECK(cli::run_every_command(in, b).empty());
  CHECK(cli::file_count(a) > 20);
  const auto diff = cli::diff_trees(a, b);
  for (const auto& d : diff) MESSAGE("differs: " << d);
  CHECK(diff.empty());
}

TEST_CASE("fit outputs") {
  const auto in = cli::work_dir("cli_fit_in");
  cli::prepare_inputs(in);
  const auto out = cli::work_dir("cli_fit");
  const std::string shoes = (in / "shoes.csv").string();
  REQUIRE(cli::run("--out " + out.string() + " fit " + shoes +
                   " --grid 40x30 --partition expert --method naive --prefix n") == 0);
  // header plus one row per region after the provenance line
  const std::string csv = cli::read_file(out / "n_naive.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 1 + 14);
  CHECK(csv.rfind("# racint", 0) == 0);

  REQUIRE(cli::run("--out " + out.string() + " fit " + shoes +
                   " --grid 40x30 --partition expert --method all --prefix a") == 0);
  const auto naive = racint::read_json(out / "a_naive.json")["fit"];
  const auto cml = racint::read_json(out / "a_cml.json")["fit"];
  CHECK_FALSE(cml["rescale_constant"].is_null());
  double sn = 0, sc = 0;
  for (const auto& v : naive["lambda_hat"]) sn += v.get<double>();
  for (const auto& v : cml["lambda_hat"]) sc += v.get<double>();
  CHECK(sc == doctest::Approx(sn).epsilon(1e-12));
  CHECK(cli::fs::exists(out / "a_comparison.csv"));
  CHECK(cli::fs::exists(out / "a_re.pgm"));

  // a single-shoe data set is loadable
  REQUIRE(cli::run("--out " + out.string() + " generate --shoes 1 --grid 40x30 --output one.json") == 0);
  CHECK(cli::run("--out " + out.string() + " fit " + (out / "one.json").string() +
                 " --partition expert --method naive --prefix one") == 0);
}

TEST_CASE("exit codes") {
  const auto out = cli::work_dir("cli_codes");
  const std::string o = "--out " + out.string() + " ";
  CHECK(cli::run("--version") == 0);
  CHECK(cli::run("") == 2);
  CHECK(cli::run(o + "frobnicate") == 2);
  CHECK(cli::run(o + "generate --shoes -3") == 2);
  CHECK(cli::run(o + "generate --coverage 1.5") == 2);
  CHECK(cli::run(o + "generate --a-law cauchy:1") == 2);
  CHECK(cli::run(o + "fit /nonexistent.csv") == 2);
  CHECK(cli::run(o + "fit " + (out / "x").string() + " --partition file") == 2);

  {
    std::ofstream bad(out / "bad.csv");
    bad << "shoe_id,x,y,S,n\na,5000,1,1,0\n";
  }
  CHECK(cli::run(o + "fit " + (out / "bad.csv").string() + " --method naive") == 3);
  {
    std::ofstream bad(out / "layout.json");
    bad << R"({"y_cuts":[0.2,0.3,0.4,0.5,0.6,1.0]})";
  }
  cli::prepare_inputs(out);
  CHECK(cli::run(o + "fit " + (out / "shoes.csv").string() + " --grid 40x30 --partition file --partition-file " +
                 (out / "layout.json").string()) == 3);
}
