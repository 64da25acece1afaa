#include "racint/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "racint/error.hpp"

namespace racint {

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::kInvalidInput, "cannot write " + path.string());
  return os;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::kInvalidInput, "cannot read " + path.string());
  return is;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

template <typename T>
T parse_number(const std::string& s, const std::string& where) {
  T v{};
  const auto* b = s.data();
  const auto* e = s.data() + s.size();
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) {
    fail(ErrorKind::kInvalidInput, where + ": cannot parse '" + s + "'");
  }
  return v;
}

Point point_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) fail(ErrorKind::kInvalidInput, "point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json point_json(const Point& p) { return Json::array({p.x(), p.y()}); }

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json Provenance::to_json() const {
  Json j;
  j["version"] = version;
  j["config"] = config;
  return j;
}

std::string Provenance::comment() const { return "# racint " + version + " " + config.dump(); }

// --- shoes ------------------------------------------------------------------

std::vector<StandardShoe> read_shoes_csv(const fs::path& path, GridDims grid) {
  require(grid.height > 0 && grid.width > 0, "grid dimensions must be positive");
  std::ifstream is = open_in(path);
  std::string line;
  std::vector<StandardShoe> shoes;
  std::map<std::string, std::size_t> index;
  bool header = false;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, ',');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (!header) {
      if (f.size() != 5 || f[0] != "shoe_id" || f[1] != "x" || f[2] != "y" || f[3] != "S" ||
          f[4] != "n") {
        fail(ErrorKind::kInvalidInput, where + ": expected header shoe_id,x,y,S,n");
      }
      header = true;
      continue;
    }
    if (f.size() != 5) fail(ErrorKind::kInvalidInput, where + ": expected 5 fields");
    const int x = parse_number<int>(f[1], where);
    const int y = parse_number<int>(f[2], where);
    const int s = parse_number<int>(f[3], where);
    const int n = parse_number<int>(f[4], where);
    if (x < 0 || x >= grid.width || y < 0 || y >= grid.height) {
      fail(ErrorKind::kOutOfDomain, where + ": pixel (" + f[1] + "," + f[2] + ") outside the grid");
    }
    if ((s != 0 && s != 1) || n < 0) {
      fail(ErrorKind::kInvalidInput, where + ": S must be 0/1 and n >= 0");
    }
    auto it = index.find(f[0]);
    if (it == index.end()) {
      it = index.emplace(f[0], shoes.size()).first;
      StandardShoe sh;
      sh.shoe_id = f[0];
      sh.S = ContactMask::Zero(grid.height, grid.width);
      sh.n = CountMatrix::Zero(grid.height, grid.width);
      shoes.push_back(std::move(sh));
    }
    auto& sh = shoes[it->second];
    sh.S(y, x) = static_cast<std::uint8_t>(s);
    sh.n(y, x) = n;
  }
  if (!header) fail(ErrorKind::kInvalidInput, path.string() + ": empty shoe file");
  for (auto& s : shoes) {
    mark_rac_pixels_as_contact(s);
    validate(s);
  }
  return shoes;
}

void write_shoes_csv(const fs::path& path, std::span<const StandardShoe> shoes,
                     const Provenance* prov) {
  std::ofstream os = open_out(path);
  if (prov) os << prov->comment() << '\n';
  os << "shoe_id,x,y,S,n\n";
  for (const auto& s : shoes) {
    for (int r = 0; r < s.S.rows(); ++r) {
      for (int c = 0; c < s.S.cols(); ++c) {
        if (s.S(r, c) == 0 && s.n(r, c) == 0) continue;
        os << s.shoe_id << ',' << c << ',' << r << ',' << int(s.S(r, c)) << ',' << s.n(r, c)
           << '\n';
      }
    }
  }
}

Json mask_to_rle(const ContactMask& m) {
  Json rle = Json::array();
  const long size = static_cast<long>(m.rows()) * m.cols();
  long k = 0;
  while (k < size) {
    if (!m(k / m.cols(), k % m.cols())) {
      ++k;
      continue;
    }
    const long start = k;
    while (k < size && m(k / m.cols(), k % m.cols())) ++k;
    rle.push_back(start);
    rle.push_back(k - start);
  }
  return rle;
}

ContactMask mask_from_rle(const Json& rle, GridDims grid) {
  if (!rle.is_array() || rle.size() % 2 != 0) {
    fail(ErrorKind::kInvalidInput, "mask_rle must be a flat list of (start, length) pairs");
  }
  ContactMask m = ContactMask::Zero(grid.height, grid.width);
  for (std::size_t i = 0; i < rle.size(); i += 2) {
    const long start = rle[i].get<long>();
    const long len = rle[i + 1].get<long>();
    if (start < 0 || len < 0 || start + len > grid.size()) {
      fail(ErrorKind::kOutOfDomain, "mask run outside the grid");
    }
    for (long k = start; k < start + len; ++k) m(k / grid.width, k % grid.width) = 1;
  }
  return m;
}

std::vector<StandardShoe> read_shoes_json(const fs::path& path) {
  const Json j = read_json(path);
  try {
    const GridDims grid{j.at("grid").at("height").get<int>(), j.at("grid").at("width").get<int>()};
    require(grid.height > 0 && grid.width > 0, "grid dimensions must be positive");
    std::vector<StandardShoe> shoes;
    for (const auto& e : j.at("shoes")) {
      StandardShoe s;
      s.shoe_id = e.at("shoe_id").get<std::string>();
      s.S = mask_from_rle(e.at("mask_rle"), grid);
      s.n = CountMatrix::Zero(grid.height, grid.width);
      for (const auto& r : e.at("racs")) {
        const int row = r.at(0).get<int>(), col = r.at(1).get<int>(), cnt = r.at(2).get<int>();
        if (row < 0 || row >= grid.height || col < 0 || col >= grid.width) {
          fail(ErrorKind::kOutOfDomain, "shoe " + s.shoe_id + ": RAC pixel outside the grid");
        }
        require(cnt >= 0, "RAC counts must be >= 0");
        s.n(row, col) = cnt;
      }
      mark_rac_pixels_as_contact(s);
      validate(s);
      shoes.push_back(std::move(s));
    }
    return shoes;
  } catch (const Json::exception& e) {
    fail(ErrorKind::kInvalidInput, path.string() + ": " + e.what());
  }
}

void write_shoes_json(const fs::path& path, std::span<const StandardShoe> shoes,
                      const Provenance* prov) {
  Json j;
  if (prov) j["provenance"] = prov->to_json();
  const GridDims g = shoes.empty() ? GridDims{} : shoes.front().dims();
  j["grid"] = {{"height", g.height}, {"width", g.width}};
  j["shoes"] = Json::array();
  for (const auto& s : shoes) {
    Json e;
    e["shoe_id"] = s.shoe_id;
    e["mask_rle"] = mask_to_rle(s.S);
    Json racs = Json::array();
    for (int r = 0; r < s.n.rows(); ++r) {
      for (int c = 0; c < s.n.cols(); ++c) {
        if (s.n(r, c) > 0) racs.push_back(Json::array({r, c, s.n(r, c)}));
      }
    }
    e["racs"] = std::move(racs);
    j["shoes"].push_back(std::move(e));
  }
  write_json(path, j);
}

std::vector<StandardShoe> load_shoes(const fs::path& path, GridDims grid) {
  const std::string ext = path.extension().string();
  if (ext == ".json") return read_shoes_json(path);
  if (ext == ".csv") return read_shoes_csv(path, grid);
  fail(ErrorKind::kInvalidInput, path.string() + ": expected a .csv or .json shoe file");
}

std::vector<RawPrint> read_raw_prints(const fs::path& path) {
  const Json j = read_json(path);
  auto one = [](const Json& e) {
    RawPrint r;
    r.print_id = e.at("print_id").get<std::string>();
    r.landmark_top = point_from_json(e.at("landmark_top"));
    r.landmark_bottom = point_from_json(e.at("landmark_bottom"));
    for (const auto& p : e.at("rac_points")) r.rac_points.push_back(point_from_json(p));
    r.is_right_shoe = e.value("is_right_shoe", false);
    const auto& m = e.at("mask");
    const GridDims g{m.at("height").get<int>(), m.at("width").get<int>()};
    r.contact_mask = mask_from_rle(m.at("rle"), g);
    return r;
  };
  try {
    std::vector<RawPrint> out;
    if (j.is_array()) {
      for (const auto& e : j) out.push_back(one(e));
    } else {
      out.push_back(one(j));
    }
    return out;
  } catch (const Json::exception& e) {
    fail(ErrorKind::kInvalidInput, path.string() + ": " + e.what());
  }
}

Json to_json(const RawPrint& raw) {
  Json j;
  j["print_id"] = raw.print_id;
  j["landmark_top"] = point_json(raw.landmark_top);
  j["landmark_bottom"] = point_json(raw.landmark_bottom);
  j["rac_points"] = Json::array();
  for (const auto& p : raw.rac_points) j["rac_points"].push_back(point_json(p));
  j["is_right_shoe"] = raw.is_right_shoe;
  j["mask"] = {{"height", raw.contact_mask.rows()},
               {"width", raw.contact_mask.cols()},
               {"rle", mask_to_rle(raw.contact_mask)}};
  return j;
}

// --- layouts, splines, metadata -------------------------------------------------

Json to_json(const RegionLayout& layout) {
  Json j;
  j["y_cuts"] = layout.y_cuts;
  j["x_cut"] = layout.x_cut;
  j["pad_band"] = layout.pad_band;
  j["pad_inner_poly"] = Json::array();
  for (const auto& p : layout.pad_inner_poly) j["pad_inner_poly"].push_back(point_json(p));
  return j;
}

RegionLayout layout_from_json(const Json& j) {
  try {
    RegionLayout l;
    l.y_cuts = j.at("y_cuts").get<std::vector<double>>();
    l.x_cut = j.at("x_cut").get<double>();
    l.pad_band = j.at("pad_band").get<int>();
    l.pad_inner_poly.clear();
    for (const auto& p : j.at("pad_inner_poly")) l.pad_inner_poly.push_back(point_from_json(p));
    return l;
  } catch (const Json::exception& e) {
    fail(ErrorKind::kInvalidLayout, std::string("region layout: ") + e.what());
  }
}

RegionLayout read_layout(const fs::path& path) { return layout_from_json(read_json(path)); }

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(number_or_null(v[k]));
  return a;
}

Json to_json(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number_or_null(m(r, c)));
    a.push_back(std::move(row));
  }
  return a;
}

namespace {

Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    v[static_cast<Eigen::Index>(k)] =
        j[k].is_null() ? std::numeric_limits<double>::quiet_NaN() : j[k].get<double>();
  }
  return v;
}

}  // namespace

Json to_json(const SplineSpec& spec) {
  Json j;
  j["knots_x"] = to_json(spec.knots_x);
  j["knots_y"] = to_json(spec.knots_y);
  j["beta"] = to_json(spec.beta);
  j["centering"] = spec.centering == Centering::kNone ? "none" : "as-fit";
  j["intercept_identified"] = spec.intercept_identified;
  return j;
}

SplineSpec spline_from_json(const Json& j) {
  try {
    SplineSpec s;
    s.knots_x = vector_from_json(j.at("knots_x"));
    s.knots_y = vector_from_json(j.at("knots_y"));
    s.beta = vector_from_json(j.at("beta"));
    const std::string c = j.value("centering", "none");
    require(c == "none" || c == "as-fit", "spline centering must be none or as-fit");
    s.centering = c == "none" ? Centering::kNone : Centering::kAsFit;
    s.intercept_identified = j.value("intercept_identified", true);
    validate(s);
    return s;
  } catch (const Json::exception& e) {
    fail(ErrorKind::kInvalidInput, std::string("spline: ") + e.what());
  }
}

Json to_json(const SubsampleMeta& meta) {
  Json j;
  j["scheme"] = to_string(meta.scheme);
  j["controls_per_cluster"] = meta.controls_per_cluster;
  j["seed"] = meta.seed;
  j["clusters"] = Json::array();
  for (std::size_t i = 0; i < meta.cluster_ids.size(); ++i) {
    j["clusters"].push_back({{"id", meta.cluster_ids[i]},
                             {"rho1", meta.rho1[i]},
                             {"rho0", meta.rho0[i]},
                             {"offset", number_or_null(std::log(meta.rho1[i] / meta.rho0[i]))}});
  }
  j["warnings"] = meta.warnings;
  return j;
}

Json to_json(const PixelFit& fit, bool include_surface) {
  Json j;
  j["method"] = to_string(fit.method);
  j["grid"] = {{"height", fit.grid.height}, {"width", fit.grid.width}};
  if (fit.spline) j["spline"] = to_json(*fit.spline);
  j["theta"] = fit.sigma_hat ? Json(*fit.sigma_hat) : Json(nullptr);
  j["covariance"] = fit.covariance ? to_json(*fit.covariance) : Json(nullptr);
  j["log_likelihood"] = fit.log_likelihood ? number_or_null(*fit.log_likelihood) : Json(nullptr);
  j["var_a_hat"] = fit.var_a_hat ? Json(*fit.var_a_hat) : Json(nullptr);
  j["rescale_constant"] = fit.rescale_constant ? Json(*fit.rescale_constant) : Json(nullptr);
  j["iterations"] = fit.iterations;
  j["sampling"] = to_json(fit.sample_meta);
  j["warnings"] = fit.warnings;
  if (include_surface) j["lambda_hat"] = to_json(fit.lambda_hat);
  return j;
}

Json to_json(const RegionFit& fit) {
  Json j;
  j["method"] = to_string(fit.method);
  if (fit.prior) j["prior"] = to_string(*fit.prior);
  j["lambda_hat"] = to_json(fit.lambda_hat);
  j["lambda_var"] = fit.lambda_var ? to_json(*fit.lambda_var) : Json(nullptr);
  j["var_a_hat"] = fit.var_a_hat ? Json(*fit.var_a_hat) : Json(nullptr);
  j["covariance"] = fit.covariance ? to_json(*fit.covariance) : Json(nullptr);
  j["rescale_constant"] = fit.rescale_constant ? Json(*fit.rescale_constant) : Json(nullptr);
  if (fit.cis) {
    Json cis = Json::array();
    for (const auto& c : *fit.cis) cis.push_back({number_or_null(c.lo), number_or_null(c.hi)});
    j["cis"] = std::move(cis);
  } else {
    j["cis"] = nullptr;
  }
  Json flags = Json::array();
  for (auto b : fit.at_boundary) flags.push_back(b != 0);
  j["at_boundary"] = std::move(flags);
  j["log_likelihood"] = fit.log_likelihood ? number_or_null(*fit.log_likelihood) : Json(nullptr);
  j["score_residual"] = fit.score_residual ? Json(*fit.score_residual) : Json(nullptr);
  if (fit.reference_region >= 0) j["reference_region"] = fit.reference_region;
  j["iterations"] = fit.iterations;
  j["warnings"] = fit.warnings;
  return j;
}

Json to_json(const StatsReport& rep) {
  Json j;
  j["grid"] = {{"height", rep.grid.height}, {"width", rep.grid.width}};
  j["shoes"] = Json::array();
  for (std::size_t i = 0; i < rep.shoe_ids.size(); ++i) {
    j["shoes"].push_back({{"shoe_id", rep.shoe_ids[i]},
                          {"racs", rep.racs_per_shoe[i]},
                          {"contact_pixels", rep.contact_per_shoe[i]}});
  }
  j["spearman_contact_vs_racs"] =
      rep.spearman_contact_vs_racs ? Json(*rep.spearman_contact_vs_racs) : Json(nullptr);
  return j;
}

Json to_json(const ComparisonTable& t) {
  Json j;
  j["scenario_id"] = t.scenario_id;
  j["replications"] = t.replications;
  j["cells"] = t.cells;
  j["truth"] = to_json(t.truth);
  j["methods"] = Json::array();
  for (const auto& m : t.methods) {
    Json e;
    e["method"] = m.method;
    e["mean_estimate"] = to_json(m.mean_estimate);
    e["bias"] = to_json(m.bias);
    e["variance"] = to_json(m.variance);
    e["mse"] = to_json(m.mse);
    e["mean_abs_bias"] = number_or_null(m.mean_abs_bias);
    e["mean_mse"] = number_or_null(m.mean_mse);
    e["successes"] = m.successes;
    e["failures"] = m.failures;
    e["failure_messages"] = m.failure_messages;
    j["methods"].push_back(std::move(e));
  }
  return j;
}

Json to_json(const Scenario& sc) {
  Json j;
  j["scenario_id"] = sc.scenario_id;
  j["description"] = sc.description;
  j["design"] = to_string(sc.design);
  j["replications"] = sc.replications;
  j["full_replications"] = sc.full_replications;
  j["seed"] = sc.seed;
  Json law;
  law["law"] = to_string(sc.a_law.kind);
  switch (sc.a_law.kind) {
    case ALawKind::kNormal: law["sd"] = sc.a_law.p1; break;
    case ALawKind::kGamma:
      law["shape"] = sc.a_law.p1;
      law["scale"] = sc.a_law.p2;
      break;
    case ALawKind::kUniform:
      law["lo"] = sc.a_law.p1;
      law["hi"] = sc.a_law.p2;
      break;
    case ALawKind::kShiftedBernoulli:
      law["lo"] = sc.a_law.p1;
      law["hi"] = sc.a_law.p2;
      law["p_lo"] = sc.a_law.p3;
      break;
    case ALawKind::kEmpirical: break;
    case ALawKind::kConstant: law["value"] = sc.a_law.p1; break;
  }
  j["a_law"] = std::move(law);
  if (sc.design == Design::kLogisticCluster) {
    j["clusters"] = sc.clusters;
    j["cluster_size"] = sc.cluster_size;
    j["beta"] = {sc.beta[0], sc.beta[1], sc.beta[2]};
    j["controls_per_cluster"] = sc.controls_per_cluster;
    j["quadrature_order"] = sc.quadrature_order;
    Json schemes = Json::array();
    for (auto s : sc.schemes) schemes.push_back(to_string(s));
    j["schemes"] = std::move(schemes);
  } else {
    j["shoes"] = sc.shoes;
    j["partition"] = sc.partition;
    j["lambda"] = to_json(sc.lambda);
    j["resample_shoes"] = sc.resample_shoes;
    j["surface"] = {{"grid", {sc.surface.grid.height, sc.surface.grid.width}},
                    {"shoes", sc.surface.shoes},
                    {"coverage", sc.surface.coverage},
                    {"coverage_spread", sc.surface.coverage_spread},
                    {"base_var_a", sc.surface.base_var_a},
                    {"seed", sc.surface.seed}};
  }
  return j;
}

Scenario scenario_from_json(const Json& j) {
  try {
    Scenario sc;
    sc.scenario_id = j.at("scenario_id").get<std::string>();
    sc.description = j.value("description", "");
    sc.design = design_from_string(j.at("design").get<std::string>());
    sc.replications = j.value("replications", sc.replications);
    sc.full_replications = j.value("full_replications", sc.full_replications);
    sc.seed = j.value("seed", sc.seed);
    const Json& law = j.at("a_law");
    const ALawKind kind = alaw_kind_from_string(law.at("law").get<std::string>());
    switch (kind) {
      case ALawKind::kNormal: sc.a_law = ALaw::normal(law.at("sd").get<double>()); break;
      case ALawKind::kGamma:
        sc.a_law = ALaw::gamma(law.at("shape").get<double>(), law.at("scale").get<double>());
        break;
      case ALawKind::kUniform:
        sc.a_law = ALaw::uniform(law.at("lo").get<double>(), law.at("hi").get<double>());
        break;
      case ALawKind::kShiftedBernoulli:
        sc.a_law = ALaw::shifted_bernoulli(law.at("lo").get<double>(), law.at("hi").get<double>(),
                                           law.value("p_lo", 0.5));
        break;
      case ALawKind::kEmpirical: sc.a_law = ALaw::empirical(); break;
      case ALawKind::kConstant: sc.a_law = ALaw::constant(law.value("value", 1.0)); break;
    }
    if (sc.design == Design::kLogisticCluster) {
      sc.clusters = j.value("clusters", sc.clusters);
      sc.cluster_size = j.value("cluster_size", sc.cluster_size);
      if (j.contains("beta")) {
        const auto b = j.at("beta").get<std::vector<double>>();
        require(b.size() == 3, "beta must have 3 entries");
        sc.beta = Eigen::Vector3d(b[0], b[1], b[2]);
      }
      sc.controls_per_cluster = j.value("controls_per_cluster", sc.controls_per_cluster);
      sc.quadrature_order = j.value("quadrature_order", sc.quadrature_order);
      if (j.contains("schemes")) {
        sc.schemes.clear();
        for (const auto& s : j.at("schemes")) sc.schemes.push_back(scheme_from_string(s.get<std::string>()));
      }
    } else {
      sc.shoes = j.value("shoes", sc.shoes);
      sc.partition = j.value("partition", sc.partition);
      sc.lambda = vector_from_json(j.at("lambda"));
      sc.resample_shoes = j.value("resample_shoes", false);
      if (j.contains("surface")) {
        const Json& s = j.at("surface");
        if (s.contains("grid")) {
          sc.surface.grid = {s.at("grid").at(0).get<int>(), s.at("grid").at(1).get<int>()};
        }
        sc.surface.shoes = s.value("shoes", sc.surface.shoes);
        sc.surface.coverage = s.value("coverage", sc.surface.coverage);
        sc.surface.coverage_spread = s.value("coverage_spread", sc.surface.coverage_spread);
        sc.surface.base_var_a = s.value("base_var_a", sc.surface.base_var_a);
        sc.surface.seed = s.value("seed", sc.surface.seed);
      }
    }
    validate(sc);
    return sc;
  } catch (const Json::exception& e) {
    fail(ErrorKind::kInvalidInput, std::string("scenario: ") + e.what());
  }
}

Scenario read_scenario(const fs::path& path) { return scenario_from_json(read_json(path)); }

// --- tables and images ------------------------------------------------------------

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m, const Provenance* prov) {
  std::ofstream os = open_out(path);
  if (prov) os << prov->comment() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << format_double(m(r, c));
    }
    os << '\n';
  }
}

void write_pgm(const fs::path& path, const Eigen::MatrixXd& m, const Provenance* prov) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    if (std::isfinite(m(k))) {
      lo = std::min(lo, m(k));
      hi = std::max(hi, m(k));
    }
  }
  std::ofstream os = open_out(path);
  os << "P2\n";
  if (prov) os << prov->comment() << '\n';
  os << "# range " << format_double(std::isfinite(lo) ? lo : 0.0) << ' '
     << format_double(std::isfinite(hi) ? hi : 0.0) << '\n';
  os << m.cols() << ' ' << m.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      int g = 0;
      if (std::isfinite(v)) g = hi > lo ? static_cast<int>(std::lround(255.0 * (v - lo) / (hi - lo))) : 255;
      os << g << (c + 1 == m.cols() ? '\n' : ' ');
    }
  }
}

void write_comparison_csv(const fs::path& path, const ComparisonTable& t, const Provenance* prov) {
  std::ofstream os = open_out(path);
  if (prov) os << prov->comment() << '\n';
  os << "scenario,method,cell,bias,mse\n";
  for (const auto& m : t.methods) {
    for (std::size_t j = 0; j < t.cells.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      os << t.scenario_id << ',' << m.method << ',' << t.cells[j] << ','
         << format_double(m.bias[jj]) << ',' << format_double(m.mse[jj]) << '\n';
    }
  }
}

void write_summary_csv(const fs::path& path, const ComparisonTable& t, const Provenance* prov) {
  std::ofstream os = open_out(path);
  if (prov) os << prov->comment() << '\n';
  os << "scenario,method,mean_mse,mean_abs_bias,successes,failures\n";
  for (const auto& m : t.methods) {
    os << t.scenario_id << ',' << m.method << ',' << format_double(m.mean_mse) << ','
       << format_double(m.mean_abs_bias) << ',' << m.successes << ',' << m.failures << '\n';
  }
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream os = open_out(path);
  os << j.dump(2) << '\n';
}

Json read_json(const fs::path& path) {
  std::ifstream is = open_in(path);
  try {
    return Json::parse(is);
  } catch (const Json::exception& e) {
    fail(ErrorKind::kInvalidInput, path.string() + ": " + e.what());
  }
}

}  // namespace racint
