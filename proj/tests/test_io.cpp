#include <doctest.h>

#include <fstream>
#include <sstream>

#include "racint/error.hpp"
#include "racint/io.hpp"

using namespace racint;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "racint_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<StandardShoe> sample_shoes() {
  GenerateParams p;
  p.shoes = 4;
  p.grid = {30, 20};
  p.avg_racs = 10;
  return generate_shoes(p);
}

}  // namespace

TEST_CASE("shoe CSV and JSON round trips") {
  const auto shoes = sample_shoes();
  const fs::path csv = scratch("shoes.csv"), json = scratch("shoes.json");
  Provenance prov{"test", {{"k", 1}}};
  write_shoes_csv(csv, shoes, &prov);
  write_shoes_json(json, shoes, &prov);
  CHECK(slurp(csv).rfind("# racint test", 0) == 0);
  for (const auto& back : {read_shoes_csv(csv, {30, 20}), read_shoes_json(json), load_shoes(json, {})}) {
    REQUIRE(back.size() == shoes.size());
    for (std::size_t i = 0; i < shoes.size(); ++i) {
      CHECK(back[i].shoe_id == shoes[i].shoe_id);
      CHECK(back[i].S == shoes[i].S);
      CHECK(back[i].n == shoes[i].n);
    }
  }
}

TEST_CASE("bad shoe files") {
  const fs::path p = scratch("bad.csv");
  {
    std::ofstream out(p);
    out << "shoe_id,x,y,S,n\na,50,1,1,0\n";
  }
  try {
    read_shoes_csv(p, {30, 20});
    FAIL("expected out-of-domain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kOutOfDomain);
  }
  {
    std::ofstream out(p);
    out << "id,x,y\n";
  }
  CHECK_THROWS_AS(read_shoes_csv(p, {30, 20}), Error);
  {
    std::ofstream out(p);
    out << "shoe_id,x,y,S,n\na,1,1,0,2\n";
  }
  // a RAC off contact marks the pixel as contact
  const auto fixed = read_shoes_csv(p, {30, 20});
  CHECK(fixed[0].S(1, 1) == 1);
  CHECK_THROWS_AS(load_shoes(scratch("x.txt"), {}), Error);
}

TEST_CASE("run-length masks") {
  ContactMask m = ContactMask::Zero(3, 4);
  m(0, 3) = m(1, 0) = m(1, 1) = m(2, 3) = 1;
  const Json rle = mask_to_rle(m);
  CHECK(rle.dump() == "[3,3,11,1]");
  CHECK(mask_from_rle(rle, {3, 4}) == m);
}

TEST_CASE("raw prints") {
  const fs::path p = scratch("raw.json");
  {
    std::ofstream out(p);
    out << R"({"print_id":"p1","landmark_top":[5,0],"landmark_bottom":[5,10],"rac_points":[[2.5,3.5]],)"
        << R"("is_right_shoe":true,"mask":{"height":10,"width":10,"rle":[0,100]}})";
  }
  const auto raw = read_raw_prints(p);
  REQUIRE(raw.size() == 1);
  CHECK(raw[0].is_right_shoe);
  CHECK(raw[0].contact_mask.cast<int>().sum() == 100);
  CHECK(raw[0].rac_points[0] == Point(2.5, 3.5));
  const Json again = to_json(raw[0]);
  CHECK(again["print_id"] == "p1");
}

TEST_CASE("layouts, splines and scenarios round trip") {
  RegionLayout l;
  l.x_cut = 0.45;
  const RegionLayout back = layout_from_json(to_json(l));
  CHECK(back.x_cut == 0.45);
  CHECK(back.y_cuts == l.y_cuts);
  CHECK(back.pad_inner_poly.size() == l.pad_inner_poly.size());
  Json bad = to_json(l);
  bad["y_cuts"] = "x";
  try {
    layout_from_json(bad);
    FAIL("expected invalid-layout");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidLayout);
  }

  SplineSpec s;
  s.knots_x = Eigen::Vector2d(0.3, 0.6);
  s.knots_y = Eigen::VectorXd::Constant(1, 0.5);
  s.beta = Eigen::VectorXd::LinSpaced(s.design_dim(), -1.0, 1.0 / 3.0);
  s.centering = Centering::kAsFit;
  s.intercept_identified = false;
  const SplineSpec t = spline_from_json(to_json(s));
  CHECK(t.beta == s.beta);
  CHECK(t.knots_x == s.knots_x);
  CHECK(t.centering == Centering::kAsFit);
  CHECK_FALSE(t.intercept_identified);

  for (const auto& sc : builtin_scenarios()) {
    CHECK(to_json(scenario_from_json(to_json(sc))).dump() == to_json(sc).dump());
  }
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 6.02e23, -2.5e-300}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::nan("")) == "NA");
}

TEST_CASE("grid CSV and PGM") {
  Eigen::MatrixXd m(2, 3);
  m << 0.0, 0.5, std::nan(""), 1.0, 2.0, 0.25;
  const fs::path csv = scratch("m.csv"), pgm = scratch("m.pgm");
  write_matrix_csv(csv, m);
  write_pgm(pgm, m);
  CHECK(slurp(csv) == "0,0.5,NA\n1,2,0.25\n");
  const std::string img = slurp(pgm);
  CHECK(img.rfind("P2\n", 0) == 0);
  CHECK(img.find("3 2\n255\n") != std::string::npos);
  CHECK(img.find("0 64 0\n128 255 32\n") != std::string::npos);
}
