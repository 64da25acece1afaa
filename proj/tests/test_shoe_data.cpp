#include <doctest.h>

#include <random>
#include <vector>

#include "racint/error.hpp"
#include "racint/shoe_data.hpp"

using namespace racint;

namespace {

RawPrint upright(Point rac) {
  RawPrint r;
  r.print_id = "p";
  r.landmark_top = {0.0, 0.0};
  r.landmark_bottom = {0.0, 10.0};
  r.rac_points = {rac};
  r.contact_mask = ContactMask::Ones(12, 12);
  return r;
}

StandardShoe blank(GridDims g) {
  StandardShoe s;
  s.shoe_id = "s";
  s.S = ContactMask::Zero(g.height, g.width);
  s.n = CountMatrix::Zero(g.height, g.width);
  return s;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::kInvalidState;
}

}  // namespace

TEST_CASE("landmark midpoint maps to the origin") {
  const RawPrint r = upright({0.0, 5.0});
  const Point s = to_standard(r, r.rac_points[0]);
  CHECK(s.norm() < 1e-15);
  CHECK(to_standard(r, r.landmark_top).isApprox(Point(0.0, 0.5)));
  CHECK(to_standard(r, r.landmark_bottom).isApprox(Point(0.0, -0.5)));
}

TEST_CASE("rotated print") {
  RawPrint r = upright({3.535, 3.535});
  r.landmark_bottom = {7.07, 7.07};
  CHECK(to_standard(r, r.rac_points[0]).norm() < 1e-12);
  // a point along the landmark axis keeps its distance, scaled by the length
  const Point q = to_standard(r, {7.07 * 0.75, 7.07 * 0.75});
  CHECK(q.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(q.y() == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("right shoes are mirrored") {
  RawPrint left = upright({2.0, 5.0});
  RawPrint right = left;
  right.is_right_shoe = true;
  const Point l = to_standard(left, left.rac_points[0]);
  const Point r = to_standard(right, right.rac_points[0]);
  CHECK(l.x() == doctest::Approx(0.2));
  CHECK(r.x() == doctest::Approx(-0.2));
  CHECK(r.y() == doctest::Approx(l.y()));
  // mirroring twice is the identity
  Eigen::Affine2d twice = standardizing_transform(right);
  twice.prescale(Eigen::Vector2d(-1.0, 1.0));
  CHECK((twice * right.rac_points[0] - l).norm() < 1e-15);
}

TEST_CASE("coincident landmarks and RACs off the grid") {
  RawPrint r = upright({0.0, 5.0});
  r.landmark_bottom = r.landmark_top;
  CHECK(kind_of([&] { normalize(r, {20, 10}); }) == ErrorKind::kInvalidInput);

  // a RAC on the toe landmark lies outside a grid whose half height is < 0.5
  RawPrint far = upright({0.0, 0.0});
  far.landmark_top = {0.0, 4.0};
  far.landmark_bottom = {0.0, 6.0};
  far.rac_points = {{0.0, 0.0}};
  CHECK(kind_of([&] { normalize(far, {20, 10}); }) == ErrorKind::kOutOfDomain);
}

TEST_CASE("pixel_of and pixel_center agree") {
  const GridDims g{7, 5};
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      const auto px = pixel_of(g, pixel_center(g, r, c));
      REQUIRE(px);
      CHECK(px->first == r);
      CHECK(px->second == c);
    }
  }
  // boundaries go to the lower index
  const Point corner = pixel_center(g, 2, 2) + Point(0.5 / g.height, -0.5 / g.height);
  const auto px = pixel_of(g, corner);
  REQUIRE(px);
  CHECK(px->first == 2);
  CHECK(px->second == 2);
  CHECK_FALSE(pixel_of(g, {0.0, 0.51}));
}

TEST_CASE("normalize is idempotent on standardized input") {
  const GridDims g{40, 30};
  RawPrint r;
  r.print_id = "std";
  r.landmark_top = {g.width / 2.0, 0.0};
  r.landmark_bottom = {g.width / 2.0, static_cast<double>(g.height)};
  r.contact_mask = ContactMask::Zero(g.height, g.width);
  StandardShoe expect = blank(g);
  std::mt19937 rng(3);
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) {
      if (rng() % 3 == 0) {
        r.contact_mask(row, col) = 1;
        expect.S(row, col) = 1;
        if (rng() % 7 == 0) {
          r.rac_points.push_back({col + 0.5, row + 0.5});
          expect.n(row, col) += 1;
        }
      }
    }
  }
  const StandardShoe out = normalize(r, g);
  CHECK(out.S == expect.S);
  CHECK(out.n == expect.n);
  CHECK(out.total_racs() == static_cast<long>(r.rac_points.size()));
}

TEST_CASE("normalize marks RAC pixels as contact") {
  const GridDims g{10, 10};
  RawPrint r;
  r.landmark_top = {5.0, 0.0};
  r.landmark_bottom = {5.0, 10.0};
  r.contact_mask = ContactMask::Zero(10, 10);
  r.rac_points = {{2.5, 3.5}};
  const StandardShoe s = normalize(r, g);
  CHECK(s.S(3, 2) == 1);
  CHECK(s.n(3, 2) == 1);
  CHECK(((s.S.array() == 0) && (s.n.array() != 0)).count() == 0);
}

TEST_CASE("binarize_counts") {
  StandardShoe s = blank({4, 4});
  s.S.setOnes();
  s.n(0, 0) = 1;
  auto r0 = binarize_counts(s);
  CHECK(r0.modified == 0);
  CHECK(r0.shoe.n == s.n);

  s.n(1, 1) = 2;
  auto r1 = binarize_counts(s);
  CHECK(r1.modified == 1);
  CHECK(r1.shoe.n(1, 1) == 1);

  s.n(2, 2) = 3;
  s.n(3, 3) = 2;
  auto r3 = binarize_counts(s);
  CHECK(r3.modified == 3);
  CHECK(r3.shoe.n.maxCoeff() == 1);
  CHECK(r3.shoe.n.sum() == 4);
}

TEST_CASE("validate rejects RACs off contact") {
  StandardShoe s = blank({3, 3});
  s.n(1, 1) = 1;
  CHECK_THROWS_AS(validate(s), Error);
  CHECK(mark_rac_pixels_as_contact(s) == 1);
  CHECK_NOTHROW(validate(s));
}

TEST_CASE("spearman") {
  const std::vector<double> a{10, 20, 30}, b{1, 2, 3}, c{3, 2, 1}, flat{5, 5, 5};
  CHECK(*spearman(a, b) == doctest::Approx(1.0));
  CHECK(*spearman(a, c) == doctest::Approx(-1.0));
  CHECK_FALSE(spearman(a, flat));
  const std::vector<double> ties{1, 2, 2, 3};
  const auto r = average_ranks(ties);
  CHECK(r == std::vector<double>{1.0, 2.5, 2.5, 4.0});
}

TEST_CASE("descriptive_stats") {
  CHECK_THROWS_AS(descriptive_stats({}), Error);

  std::vector<StandardShoe> two(2, blank({3, 3}));
  two[0].S.setOnes();
  two[1].S.setOnes();
  const auto same = descriptive_stats(two);
  CHECK_FALSE(same.spearman_contact_vs_racs);
  CHECK(same.cumulative_contact.sum() == 18);

  std::vector<StandardShoe> three(3, blank({6, 5}));
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 10 * (i + 1); ++k) three[i].S(k / 5, k % 5) = 1;
    three[i].n(0, 0) = i + 1;
  }
  const auto rep = descriptive_stats(three);
  CHECK(rep.contact_per_shoe == std::vector<long>{10, 20, 30});
  CHECK(rep.racs_per_shoe == std::vector<long>{1, 2, 3});
  REQUIRE(rep.spearman_contact_vs_racs);
  CHECK(*rep.spearman_contact_vs_racs == doctest::Approx(1.0));
}
