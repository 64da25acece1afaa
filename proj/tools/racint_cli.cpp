// racint command-line front end.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "racint/error.hpp"
#include "racint/estimators_pixel.hpp"
#include "racint/estimators_region.hpp"
#include "racint/io.hpp"
#include "racint/partitioning.hpp"
#include "racint/shoe_data.hpp"
#include "racint/simulation.hpp"
#include "racint/spline_basis.hpp"
#include "racint/stratified.hpp"
#include "racint/subsampling.hpp"
#include "racint/version.hpp"

using namespace racint;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;

struct Globals {
  std::string out_dir = ".";
  int verbose = 0;
};

Globals g_opts;

void note(const std::string& msg) {
  if (g_opts.verbose > 0) std::cerr << "racint: " << msg << '\n';
}

GridDims parse_grid(const std::string& s) {
  int h = 0, w = 0;
  char x = 0;
  std::istringstream is(s);
  if (!(is >> h >> x >> w) || x != 'x' || h <= 0 || w <= 0 || !is.eof()) {
    throw CLI::ValidationError("--grid", "expected HEIGHTxWIDTH, got '" + s + "'");
  }
  return {h, w};
}

std::string grid_string(GridDims g) {
  return std::to_string(g.height) + "x" + std::to_string(g.width);
}

std::string resolve(const std::string& p) {
  return fs::absolute(fs::path(p)).lexically_normal().string();
}

fs::path out_path(const std::string& name) {
  const fs::path p(name);
  return p.is_absolute() ? p : fs::path(g_opts.out_dir) / p;
}

Provenance provenance(const std::string& command, Json options) {
  Provenance p;
  p.version = kVersion;
  p.config["command"] = command;
  p.config["options"] = std::move(options);
  return p;
}

/// "name[:p1[,p2[,p3]]]"
ALaw parse_a_law(const std::string& s) {
  const auto colon = s.find(':');
  const std::string name = s.substr(0, colon);
  std::vector<double> p;
  if (colon != std::string::npos) {
    std::istringstream is(s.substr(colon + 1));
    std::string tok;
    while (std::getline(is, tok, ',')) {
      try {
        p.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw CLI::ValidationError("--a-law", "bad number '" + tok + "'");
      }
    }
  }
  auto need = [&](std::size_t k) {
    if (p.size() != k) {
      throw CLI::ValidationError("--a-law", name + " takes " + std::to_string(k) + " parameter(s)");
    }
  };
  if (name == "gamma") {
    need(2);
    return ALaw::gamma(p[0], p[1]);
  }
  if (name == "uniform") {
    need(2);
    return ALaw::uniform(p[0], p[1]);
  }
  if (name == "shifted_bernoulli") {
    need(3);
    return ALaw::shifted_bernoulli(p[0], p[1], p[2]);
  }
  if (name == "constant") {
    if (p.empty()) return ALaw::constant(1.0);
    need(1);
    return ALaw::constant(p[0]);
  }
  throw CLI::ValidationError("--a-law", "unknown law '" + name +
                                            "' (gamma:shape,scale | uniform:lo,hi | "
                                            "shifted_bernoulli:lo,hi,p_lo | constant[:v])");
}

std::vector<StandardShoe> load_all(const std::vector<std::string>& inputs, GridDims grid) {
  std::vector<StandardShoe> shoes;
  for (const auto& in : inputs) {
    auto part = load_shoes(in, grid);
    note("read " + std::to_string(part.size()) + " shoes from " + in);
    for (auto& s : part) shoes.push_back(std::move(s));
  }
  require(!shoes.empty(), "no shoes in the input");
  const GridDims g = shoes.front().dims();
  for (const auto& s : shoes) {
    if (!(s.dims() == g)) fail(ErrorKind::kInvalidInput, "shoe " + s.shoe_id + ": grid mismatch");
  }
  return shoes;
}

Eigen::MatrixXd paint(const Partition& part, const Eigen::VectorXd& values) {
  Eigen::MatrixXd m(part.grid.height, part.grid.width);
  for (int r = 0; r < part.grid.height; ++r) {
    for (int c = 0; c < part.grid.width; ++c) m(r, c) = values[part.label[r * part.grid.width + c]];
  }
  return m;
}

// --- fit -------------------------------------------------------------------------

struct FitArgs {
  std::vector<std::string> inputs;
  std::string grid = "397x307";
  std::string partition = "expert";
  std::string partition_file;
  std::string method = "all";
  std::string scheme = "cc_within_prop_cases";
  int controls = 20;
  int knots_x = 3;
  int knots_y = 5;
  std::optional<double> ci;
  std::string prior = "gamma";
  int quadrature_order = 21;
  int smooth = 10;
  bool binarize = false;
  std::uint64_t seed = 1;
  std::string prefix = "fit";

  Json config() const {
    Json j;
    Json in = Json::array();
    for (const auto& s : inputs) in.push_back(resolve(s));
    j["inputs"] = std::move(in);
    j["grid"] = grid;
    j["partition"] = partition;
    j["partition_file"] = partition_file.empty() ? Json(nullptr) : Json(resolve(partition_file));
    j["method"] = method;
    j["subsample"] = scheme;
    j["controls"] = controls;
    j["knots_x"] = knots_x;
    j["knots_y"] = knots_y;
    j["ci"] = ci ? Json(*ci) : Json(nullptr);
    j["prior"] = prior;
    j["quadrature_order"] = quadrature_order;
    j["smooth_half_width"] = smooth;
    j["binarize"] = binarize;
    j["seed"] = seed;
    j["prefix"] = prefix;
    return j;
  }
};

Partition partition_from_file(const std::string& path, GridDims grid) {
  const Json j = read_json(path);
  if (j.contains("labels")) {
    const auto labels = j.at("labels").get<std::vector<int>>();
    if (static_cast<long>(labels.size()) != grid.size()) {
      fail(ErrorKind::kInvalidLayout, path + ": expected " + std::to_string(grid.size()) + " labels");
    }
    Eigen::VectorXi l(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t k = 0; k < labels.size(); ++k) l[static_cast<Eigen::Index>(k)] = labels[k];
    return partition_from_labels(j.value("partition_id", fs::path(path).stem().string()), grid, l);
  }
  return expert_partition(layout_from_json(j), grid);
}

void write_region_outputs(const std::string& stem, const RegionFit& fit, const Partition& part,
                          const Provenance& prov) {
  Json j;
  j["provenance"] = prov.to_json();
  j["partition"] = {{"id", part.partition_id}, {"cells", part.cell_count()}};
  j["fit"] = to_json(fit);
  write_json(out_path(stem + ".json"), j);

  const Eigen::VectorXd se = region_se(fit);
  std::ofstream os(out_path(stem + ".csv"), std::ios::binary);
  if (!os) fail(ErrorKind::kInvalidInput, "cannot write " + out_path(stem + ".csv").string());
  os << prov.comment() << '\n';
  os << "region,lambda_hat,se";
  if (fit.cis) os << ",ci_lo,ci_hi";
  os << ",at_boundary\n";
  for (Eigen::Index r = 0; r < fit.cells(); ++r) {
    os << r + 1 << ',' << format_double(fit.lambda_hat[r]) << ',' << format_double(se[r]);
    if (fit.cis) {
      const auto& c = (*fit.cis)[static_cast<std::size_t>(r)];
      os << ',' << format_double(c.lo) << ',' << format_double(c.hi);
    }
    os << ',' << int(fit.at_boundary.empty() ? 0 : fit.at_boundary[static_cast<std::size_t>(r)])
       << '\n';
  }
  write_pgm(out_path(stem + ".pgm"), paint(part, fit.lambda_hat), &prov);
}

void write_pixel_outputs(const std::string& stem, const PixelFit& fit, std::optional<double> ci,
                         const Provenance& prov) {
  Json j;
  j["provenance"] = prov.to_json();
  j["fit"] = to_json(fit, false);
  write_json(out_path(stem + ".json"), j);
  write_matrix_csv(out_path(stem + ".csv"), fit.lambda_hat, &prov);
  write_pgm(out_path(stem + ".pgm"), fit.lambda_hat, &prov);
  if (!ci) return;
  std::vector<std::pair<int, int>> at;
  for (int r = 0; r < fit.grid.height; ++r) {
    for (int c = 0; c < fit.grid.width; ++c) {
      if (std::isfinite(fit.lambda_hat(r, c))) at.emplace_back(r, c);
    }
  }
  const auto iv = pointwise_ci(fit, *ci, at);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd lo = Eigen::MatrixXd::Constant(fit.grid.height, fit.grid.width, nan);
  Eigen::MatrixXd hi = lo;
  for (std::size_t k = 0; k < at.size(); ++k) {
    lo(at[k].first, at[k].second) = iv[k].lo;
    hi(at[k].first, at[k].second) = iv[k].hi;
  }
  write_matrix_csv(out_path(stem + "_ci_lo.csv"), lo, &prov);
  write_matrix_csv(out_path(stem + "_ci_hi.csv"), hi, &prov);
}

int run_fit(const FitArgs& a) {
  const Provenance prov = provenance("fit", a.config());
  auto shoes = load_all(a.inputs, parse_grid(a.grid));
  if (a.binarize) {
    int changed = 0;
    for (auto& s : shoes) {
      auto b = binarize_counts(std::move(s));
      changed += b.modified;
      s = std::move(b.shoe);
    }
    note("binarized " + std::to_string(changed) + " pixels");
  }
  const GridDims grid = shoes.front().dims();
  const bool want_naive = a.method == "naive" || a.method == "all";
  const bool want_re = a.method == "re" || a.method == "all";
  const bool want_cml = a.method == "cml" || a.method == "all";
  const std::string p = a.prefix;

  if (a.partition == "pixel") {
    // The naive surface is always computed: CML surfaces are rescaled to it.
    PixelFit naive = naive_pixel(shoes);
    std::optional<PixelFit> re, cml;
    if (want_re || want_cml) {
      std::vector<ClusterSample> clusters;
      clusters.reserve(shoes.size());
      for (const auto& s : shoes) clusters.push_back(contact_pixels(s));
      const Subsample sample = subsample(clusters, scheme_from_string(a.scheme),
                                         SubsampleParams{a.controls}, a.seed);
      const auto [kx, ky] = contact_knots(shoes, a.knots_x, a.knots_y);
      if (want_re) {
        note("fitting random-effects spline surface");
        GlmmOptions o;
        o.quadrature_order = a.quadrature_order;
        re = fit_re_pixel(sample, grid, kx, ky, o);
      }
      if (want_cml) {
        note("fitting conditional spline surface");
        cml = fit_cml_pixel(sample, grid, kx, ky);
        rescale_to_reference(*cml, naive);
      }
    }
    if (want_naive) {
      write_pixel_outputs(p + "_naive", naive, a.ci, prov);
      const Eigen::MatrixXd sm = kernel_smooth(naive.lambda_hat, a.smooth);
      write_matrix_csv(out_path(p + "_naive_smoothed.csv"), sm, &prov);
      write_pgm(out_path(p + "_naive_smoothed.pgm"), sm, &prov);
    }
    if (re) write_pixel_outputs(p + "_re", *re, a.ci, prov);
    if (cml) write_pixel_outputs(p + "_cml", *cml, a.ci, prov);
    if (a.method == "all") {
      std::ofstream os(out_path(p + "_comparison.csv"), std::ios::binary);
      os << prov.comment() << '\n' << "row,col,naive,re,cml\n";
      for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
          if (!std::isfinite(naive.lambda_hat(r, c))) continue;
          os << r << ',' << c << ',' << format_double(naive.lambda_hat(r, c)) << ','
             << format_double(re->lambda_hat(r, c)) << ',' << format_double(cml->lambda_hat(r, c))
             << '\n';
        }
      }
    }
    return kExitOk;
  }

  Partition part;
  if (a.partition == "expert") {
    part = expert_partition(RegionLayout{}, grid);
  } else {
    part = partition_from_file(a.partition_file, grid);
  }
  const auto records = aggregate_all(shoes, part);
  RegionFit naive = naive_region(records);
  std::optional<RegionFit> re, cml;
  if (want_re) {
    note("fitting random-effects region model");
    RegionReOptions o;
    o.prior = prior_from_string(a.prior);
    o.quadrature_order = a.quadrature_order;
    re = fit_re_region(records, o);
  }
  if (want_cml) {
    note("fitting conditional region model");
    cml = rescale_cml(fit_cml_region(records), naive);
  }
  auto finish = [&](RegionFit& f, const std::string& stem) {
    if (a.ci) f.cis = region_ci(f, *a.ci, records);
    write_region_outputs(stem, f, part, prov);
  };
  if (want_naive) finish(naive, p + "_naive");
  if (re) finish(*re, p + "_re");
  if (cml) finish(*cml, p + "_cml");
  if (a.method == "all") {
    const Eigen::VectorXd se_n = region_se(naive), se_r = region_se(*re), se_c = region_se(*cml);
    std::ofstream os(out_path(p + "_comparison.csv"), std::ios::binary);
    os << prov.comment() << '\n' << "region,naive,naive_se,re,re_se,cml,cml_se\n";
    for (Eigen::Index r = 0; r < naive.cells(); ++r) {
      os << r + 1 << ',' << format_double(naive.lambda_hat[r]) << ',' << format_double(se_n[r])
         << ',' << format_double(re->lambda_hat[r]) << ',' << format_double(se_r[r]) << ','
         << format_double(cml->lambda_hat[r]) << ',' << format_double(se_c[r]) << '\n';
    }
  }
  return kExitOk;
}

// --- simulate ----------------------------------------------------------------------

struct SimulateArgs {
  std::vector<std::string> scenarios;
  std::vector<std::string> builtin;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  bool full = false;

  Json config(const std::string& scenario) const {
    Json j;
    j["scenario"] = scenario;
    j["reps"] = reps ? Json(*reps) : Json(nullptr);
    j["seed"] = seed ? Json(*seed) : Json(nullptr);
    j["full"] = full;
    return j;
  }
};

int run_simulate(const SimulateArgs& a) {
  std::vector<std::pair<std::string, Scenario>> todo;
  for (const auto& f : a.scenarios) todo.emplace_back(resolve(f), read_scenario(f));
  if (!a.builtin.empty()) {
    const auto all = builtin_scenarios();
    for (const auto& id : a.builtin) {
      bool found = false;
      for (const auto& sc : all) {
        if (sc.scenario_id == id) {
          todo.emplace_back("builtin:" + id, sc);
          found = true;
        }
      }
      if (!found) fail(ErrorKind::kLookup, "no built-in scenario '" + id + "'");
    }
  }
  if (todo.empty()) throw CLI::ValidationError("simulate", "give a scenario file or --builtin ID");
  for (auto& [src, sc] : todo) {
    if (a.seed) sc.seed = *a.seed;
    RunOptions ro;
    ro.replications = a.reps;
    ro.full = a.full;
    note("running " + sc.scenario_id);
    const ComparisonTable t = run_scenario(sc, ro);
    const Provenance prov = provenance("simulate", a.config(src));
    write_comparison_csv(out_path(sc.scenario_id + "_comparison.csv"), t, &prov);
    write_summary_csv(out_path(sc.scenario_id + "_summary.csv"), t, &prov);
    Json j;
    j["provenance"] = prov.to_json();
    j["scenario"] = to_json(sc);
    j["table"] = to_json(t);
    write_json(out_path(sc.scenario_id + "_table.json"), j);
    for (const auto& m : t.methods) {
      note(sc.scenario_id + " " + m.method + ": mean MSE " + format_double(m.mean_mse) +
           ", failures " + std::to_string(m.failures));
    }
  }
  return kExitOk;
}

// --- generate ------------------------------------------------------------------------

struct GenerateArgs {
  int shoes = 386;
  double avg_racs = 34.0;
  double coverage = 0.55;
  double coverage_spread = 0.5;
  std::string a_law = "gamma:2,0.5";
  std::string grid = "397x307";
  std::uint64_t seed = 1;
  std::string output = "shoes.csv";

  Json config() const {
    return {{"shoes", shoes},       {"avg_racs", avg_racs}, {"coverage", coverage},
            {"coverage_spread", coverage_spread},           {"a_law", a_law},
            {"grid", grid},         {"seed", seed},         {"output", output}};
  }
};

int run_generate(const GenerateArgs& a) {
  GenerateParams p;
  p.shoes = a.shoes;
  p.avg_racs = a.avg_racs;
  p.coverage = a.coverage;
  p.coverage_spread = a.coverage_spread;
  p.a_law = parse_a_law(a.a_law);
  p.grid = parse_grid(a.grid);
  p.seed = a.seed;
  const auto shoes = generate_shoes(p);
  const Provenance prov = provenance("generate", a.config());
  const fs::path out = out_path(a.output);
  if (out.extension() == ".json") {
    write_shoes_json(out, shoes, &prov);
  } else {
    write_shoes_csv(out, shoes, &prov);
  }
  long racs = 0;
  for (const auto& s : shoes) racs += s.total_racs();
  note("wrote " + std::to_string(shoes.size()) + " shoes, " + std::to_string(racs) + " RACs to " +
       out.string());
  return kExitOk;
}

// --- subsample -----------------------------------------------------------------------

struct SubsampleArgs {
  std::vector<std::string> inputs;
  std::string grid = "397x307";
  std::string scheme = "cc_within_prop_cases";
  int controls = 20;
  std::uint64_t seed = 1;
  std::string output = "subsample.json";

  Json config() const {
    Json in = Json::array();
    for (const auto& s : inputs) in.push_back(resolve(s));
    return {{"inputs", in},       {"grid", grid}, {"scheme", scheme},
            {"controls", controls}, {"seed", seed}, {"output", output}};
  }
};

int run_subsample(const SubsampleArgs& a) {
  const auto shoes = load_all(a.inputs, parse_grid(a.grid));
  const GridDims grid = shoes.front().dims();
  std::vector<ClusterSample> clusters;
  for (const auto& s : shoes) clusters.push_back(contact_pixels(s));
  const Subsample sample =
      subsample(clusters, scheme_from_string(a.scheme), SubsampleParams{a.controls}, a.seed);
  Json j;
  j["provenance"] = provenance("subsample", a.config()).to_json();
  j["grid"] = {{"height", grid.height}, {"width", grid.width}};
  j["meta"] = to_json(sample.meta);
  j["clusters"] = Json::array();
  for (const auto& c : sample.clusters) {
    Json units = Json::array();
    for (std::size_t k = 0; k < c.size(); ++k) {
      units.push_back({c.unit[k] / grid.width, c.unit[k] % grid.width, int(c.y[k])});
    }
    j["clusters"].push_back({{"id", c.id}, {"units", std::move(units)}});
  }
  write_json(out_path(a.output), j);
  return kExitOk;
}

// --- stats ---------------------------------------------------------------------------

struct StatsArgs {
  std::vector<std::string> inputs;
  std::string grid = "397x307";
  std::string prefix = "stats";

  Json config() const {
    Json in = Json::array();
    for (const auto& s : inputs) in.push_back(resolve(s));
    return {{"inputs", in}, {"grid", grid}, {"prefix", prefix}};
  }
};

int run_stats(const StatsArgs& a) {
  const auto shoes = load_all(a.inputs, parse_grid(a.grid));
  const StatsReport rep = descriptive_stats(shoes);
  const Provenance prov = provenance("stats", a.config());
  Json j;
  j["provenance"] = prov.to_json();
  j["stats"] = to_json(rep);
  write_json(out_path(a.prefix + ".json"), j);
  const Eigen::MatrixXd cum = rep.cumulative_contact.cast<double>();
  write_matrix_csv(out_path(a.prefix + "_contact.csv"), cum, &prov);
  write_pgm(out_path(a.prefix + "_contact.pgm"), cum, &prov);
  if (rep.spearman_contact_vs_racs) {
    note("Spearman(contact pixels, RACs) = " + format_double(*rep.spearman_contact_vs_racs));
  }
  return kExitOk;
}

// --- normalize -----------------------------------------------------------------------

struct NormalizeArgs {
  std::vector<std::string> inputs;
  std::string grid = "397x307";
  bool binarize = false;
  std::string output = "shoes.csv";

  Json config() const {
    Json in = Json::array();
    for (const auto& s : inputs) in.push_back(resolve(s));
    return {{"inputs", in}, {"grid", grid}, {"binarize", binarize}, {"output", output}};
  }
};

int run_normalize(const NormalizeArgs& a) {
  const GridDims grid = parse_grid(a.grid);
  std::vector<StandardShoe> shoes;
  int changed = 0;
  for (const auto& in : a.inputs) {
    for (const auto& raw : read_raw_prints(in)) {
      StandardShoe s = normalize(raw, grid);
      if (a.binarize) {
        auto b = binarize_counts(std::move(s));
        changed += b.modified;
        s = std::move(b.shoe);
      }
      shoes.push_back(std::move(s));
    }
  }
  if (a.binarize) note("binarized " + std::to_string(changed) + " pixels");
  const Provenance prov = provenance("normalize", a.config());
  const fs::path out = out_path(a.output);
  if (out.extension() == ".json") {
    write_shoes_json(out, shoes, &prov);
  } else {
    write_shoes_csv(out, shoes, &prov);
  }
  return kExitOk;
}

// --- scenarios -----------------------------------------------------------------------

int run_export_scenarios() {
  for (const auto& sc : builtin_scenarios()) write_json(out_path(sc.scenario_id + ".json"), to_json(sc));
  return kExitOk;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::kConvergence:
    case ErrorKind::kSingularFit: return kExitConvergence;
    default: return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"racint: RAC intensity estimation on shoe soles"};
  app.set_version_flag("--version", std::string("racint ") + kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.add_option("-o,--out", g_opts.out_dir, "Output directory")
      ->envname("RACINT_OUT_DIR")
      ->capture_default_str();
  app.add_flag("-v,--verbose", g_opts.verbose, "Progress messages on stderr");

  const auto grid_check = CLI::Validator(
      [](std::string& s) {
        try {
          parse_grid(s);
        } catch (const CLI::ValidationError& e) {
          return std::string("expected HEIGHTxWIDTH");
        }
        return std::string();
      },
      "HxW");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Estimate the intensity with the naive, RE and CML methods");
  c_fit->add_option("inputs", fit.inputs, "Shoe files (.csv or .json)")->required()->check(CLI::ExistingFile);
  c_fit->add_option("--grid", fit.grid, "Grid for CSV input")->check(grid_check);
  c_fit->add_option("--partition", fit.partition, "pixel, expert or file")
      ->check(CLI::IsMember({"pixel", "expert", "file"}));
  c_fit->add_option("--partition-file", fit.partition_file,
                    "Region layout JSON, or {\"labels\": [...]} with one label per pixel")
      ->check(CLI::ExistingFile);
  c_fit->add_option("--method", fit.method, "naive, re, cml or all")
      ->check(CLI::IsMember({"naive", "re", "cml", "all"}));
  c_fit->add_option("--subsample", fit.scheme, "Pixel sampling scheme")
      ->check(CLI::IsMember({"full", "random", "cc_pooled", "cc_within_prop_size", "cc_within_prop_cases"}));
  c_fit->add_option("--controls", fit.controls, "Average controls per shoe")->check(CLI::PositiveNumber);
  c_fit->add_option("--knots-x", fit.knots_x, "Interior spline knots across the sole")->check(CLI::Range(1, 50));
  c_fit->add_option("--knots-y", fit.knots_y, "Interior spline knots along the sole")->check(CLI::Range(1, 50));
  c_fit->add_option("--ci", fit.ci, "Confidence level for intervals, e.g. 0.95")
      ->check(CLI::Range(0.0, 1.0).description("in (0, 1)"));
  c_fit->add_option("--prior", fit.prior, "Region random-effects prior: gamma or lognormal")
      ->check(CLI::IsMember({"gamma", "lognormal"}));
  c_fit->add_option("--quadrature-order", fit.quadrature_order, "Gauss-Hermite nodes")->check(CLI::Range(1, 200));
  c_fit->add_option("--smooth", fit.smooth, "Half width of the naive pixel smoother")->check(CLI::NonNegativeNumber);
  c_fit->add_flag("--binarize", fit.binarize, "Cap pixel counts at 1 before fitting");
  c_fit->add_option("--seed", fit.seed, "Sub-sampling seed");
  c_fit->add_option("--prefix", fit.prefix, "Output file prefix");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Run simulation scenarios and write bias/MSE tables");
  c_sim->add_option("scenarios", sim.scenarios, "Scenario JSON files")->check(CLI::ExistingFile);
  c_sim->add_option("--builtin", sim.builtin, "Built-in scenario id(s)");
  c_sim->add_option("--reps", sim.reps, "Replications (overrides the scenario)")->check(CLI::PositiveNumber);
  c_sim->add_option("--seed", sim.seed, "Base seed (overrides the scenario)");
  c_sim->add_flag("--full", sim.full, "Paper-scale replication count");

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Write a synthetic shoe data set");
  c_gen->add_option("--shoes", gen.shoes, "Number of shoes")->check(CLI::PositiveNumber);
  c_gen->add_option("--avg-racs", gen.avg_racs, "Expected RACs per shoe")->check(CLI::PositiveNumber);
  c_gen->add_option("--coverage", gen.coverage, "Mean covered fraction of the sole, (0, 1]")
      ->check(CLI::Range(0.0, 1.0));
  c_gen->add_option("--coverage-spread", gen.coverage_spread, "Width of the per-shoe coverage range")
      ->check(CLI::Range(0.0, 1.0));
  c_gen->add_option("--a-law", gen.a_law,
                    "Wear factor law: gamma:shape,scale | uniform:lo,hi | "
                    "shifted_bernoulli:lo,hi,p_lo | constant[:v]");
  c_gen->add_option("--grid", gen.grid, "Grid HEIGHTxWIDTH")->check(grid_check);
  c_gen->add_option("--seed", gen.seed, "Random seed");
  c_gen->add_option("--output", gen.output, "Output file (.csv or .json)");

  SubsampleArgs sub;
  auto* c_sub = app.add_subcommand("subsample", "Draw a case-control pixel sub-sample");
  c_sub->add_option("inputs", sub.inputs, "Shoe files")->required()->check(CLI::ExistingFile);
  c_sub->add_option("--grid", sub.grid, "Grid for CSV input")->check(grid_check);
  c_sub->add_option("--scheme", sub.scheme, "Sampling scheme")
      ->check(CLI::IsMember({"full", "random", "cc_pooled", "cc_within_prop_size", "cc_within_prop_cases"}));
  c_sub->add_option("--controls", sub.controls, "Average controls per shoe")->check(CLI::PositiveNumber);
  c_sub->add_option("--seed", sub.seed, "Random seed");
  c_sub->add_option("--output", sub.output, "Output JSON");

  StatsArgs st;
  auto* c_st = app.add_subcommand("stats", "Descriptive statistics of a shoe data set");
  c_st->add_option("inputs", st.inputs, "Shoe files")->required()->check(CLI::ExistingFile);
  c_st->add_option("--grid", st.grid, "Grid for CSV input")->check(grid_check);
  c_st->add_option("--prefix", st.prefix, "Output file prefix");

  NormalizeArgs nm;
  auto* c_nm = app.add_subcommand("normalize", "Map raw lab prints onto the standardized grid");
  c_nm->add_option("inputs", nm.inputs, "Raw print JSON files")->required()->check(CLI::ExistingFile);
  c_nm->add_option("--grid", nm.grid, "Grid HEIGHTxWIDTH")->check(grid_check);
  c_nm->add_flag("--binarize", nm.binarize, "Cap pixel counts at 1");
  c_nm->add_option("--output", nm.output, "Output file (.csv or .json)");

  auto* c_sc = app.add_subcommand("scenarios", "Write the built-in scenario files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_fit->parsed()) {
      if (fit.partition == "file" && fit.partition_file.empty()) {
        throw CLI::ValidationError("--partition-file", "required with --partition file");
      }
      return run_fit(fit);
    }
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_gen->parsed()) return run_generate(gen);
    if (c_sub->parsed()) return run_subsample(sub);
    if (c_st->parsed()) return run_stats(st);
    if (c_nm->parsed()) return run_normalize(nm);
    if (c_sc->parsed()) return run_export_scenarios();
  } catch (const CLI::Error& e) {
    std::cerr << "racint: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "racint: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "racint: error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
