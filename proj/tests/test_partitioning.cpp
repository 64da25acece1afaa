#include <doctest.h>

#include <set>

#include "racint/error.hpp"
#include "racint/partitioning.hpp"
#include "racint/rng.hpp"

using namespace racint;

namespace {

StandardShoe random_shoe(GridDims g, std::uint64_t seed) {
  Rng rng = split_rng(seed, 0);
  std::bernoulli_distribution contact(0.6), rac(0.05);
  StandardShoe s;
  s.shoe_id = "r" + std::to_string(seed);
  s.S = ContactMask::Zero(g.height, g.width);
  s.n = CountMatrix::Zero(g.height, g.width);
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c)
      if (contact(rng)) {
        s.S(r, c) = 1;
        if (rac(rng)) s.n(r, c) = 1 + static_cast<int>(rng() % 3);
      }
  return s;
}

}  // namespace

TEST_CASE("pixel partition sizes") {
  CHECK(pixel_partition({2, 3}).cell_count() == 6);
  CHECK(pixel_partition({397, 307}).cell_count() == 121879);
  CHECK(pixel_partition({395, 307}).cell_count() == 121265);
  const Partition p = pixel_partition({2, 3});
  for (int k = 0; k < 6; ++k) CHECK(p.cell_pixels(k) == std::vector<int>{k});
}

TEST_CASE("default expert layout tiles any grid with 14 cells") {
  for (GridDims g : {GridDims{397, 307}, GridDims{99, 77}, GridDims{60, 40}}) {
    const Partition p = expert_partition({}, g);
    CHECK(p.cell_count() == 14);
    CHECK(p.cell_area().sum() == doctest::Approx(static_cast<double>(g.size())));
    std::set<int> seen;
    for (int j = 0; j < 14; ++j) {
      CHECK_FALSE(p.cell_pixels(j).empty());
      for (int px : p.cell_pixels(j)) CHECK(seen.insert(px).second);
    }
    CHECK(static_cast<long>(seen.size()) == g.size());
  }
}

TEST_CASE("expert layout with a gap is rejected") {
  RegionLayout bad;
  bad.y_cuts = {0.0, 0.15, 0.40, 0.55, 0.80, 1.0};
  bad.y_cuts[3] = 0.60;
  bad.y_cuts[2] = 0.45;  // still ordered, no gap
  CHECK_NOTHROW(expert_partition(bad, {100, 50}));
  RegionLayout gap;
  gap.y_cuts = {0.1, 0.15, 0.40, 0.60, 0.80, 1.0};
  try {
    expert_partition(gap, {100, 50});
    FAIL("expected invalid-layout");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidLayout);
    CHECK(std::string(e.what()).find("uncovered") != std::string::npos);
  }
  RegionLayout overlap;
  overlap.y_cuts = {0.0, 0.3, 0.2, 0.60, 0.80, 1.0};
  CHECK_THROWS_AS(expert_partition(overlap, {100, 50}), Error);
}

TEST_CASE("equal bands on a 10x10 grid") {
  RegionLayout l;
  l.y_cuts = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  l.pad_band = 1;
  l.pad_inner_poly = {{0.22, 0.2}, {0.78, 0.2}, {0.78, 0.3}, {0.22, 0.3}};
  const Partition p = expert_partition(l, {10, 10});
  const Eigen::VectorXd area = p.cell_area();
  REQUIRE(area.size() == 14);
  // bands 0, 2, 3, 4 give two regions each; band 1 (ids 2..7) is the pad band
  for (int j : {0, 1, 8, 9, 10, 11, 12, 13}) CHECK(area[j] == 2 * 5);
  CHECK(area.segment(2, 6).sum() == 20);
  CHECK(area[4] == 3);  // inner, first half
  CHECK(area[2] == 2);  // outer upper
  CHECK(area[3] == 5);  // outer lower
}

TEST_CASE("block partition and labels") {
  const Partition b = block_partition({9, 8}, 3, 4);
  CHECK(b.cell_count() == 12);
  CHECK((b.cell_area().array() == 6.0).all());
  Eigen::VectorXi lab = Eigen::VectorXi::Zero(6);
  lab << 0, 0, 2, 2, 0, 0;
  CHECK_THROWS_AS(partition_from_labels("x", {2, 3}, lab), Error);  // label 1 empty
  lab[2] = 1;
  lab[3] = 1;
  CHECK(partition_from_labels("x", {2, 3}, lab).cell_count() == 2);
}

TEST_CASE("aggregate examples") {
  const GridDims g{14, 100};
  // 14 equal regions of 100 pixels: one per row
  Eigen::VectorXi lab(g.size());
  for (int k = 0; k < g.size(); ++k) lab[k] = k / g.width;
  const Partition p = partition_from_labels("rows", g, lab);
  StandardShoe s;
  s.shoe_id = "full";
  s.S = ContactMask::Ones(g.height, g.width);
  s.n = CountMatrix::Zero(g.height, g.width);
  ShoeRecord rec = aggregate(s, p);
  CHECK((rec.s_area.array() == 100.0).all());
  CHECK(rec.total == 0);

  s.n(4, 7) = 2;
  s.n(4, 50) = 1;
  rec = aggregate(s, p);
  Eigen::VectorXi want = Eigen::VectorXi::Zero(14);
  want[4] = 3;
  CHECK(rec.counts == want);
  CHECK(rec.total == 3);

  StandardShoe other = s;
  other.S = ContactMask::Ones(5, 5);
  other.n = CountMatrix::Zero(5, 5);
  CHECK_THROWS_AS(aggregate(other, p), Error);
}

TEST_CASE("aggregation sums are exact and pixel aggregation is lossless") {
  const GridDims g{30, 20};
  const std::vector<Partition> parts{pixel_partition(g), expert_partition({}, g),
                                     block_partition(g, 5, 3)};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const StandardShoe s = random_shoe(g, seed);
    for (const auto& p : parts) {
      const ShoeRecord rec = aggregate(s, p);
      CHECK(rec.s_area.sum() == static_cast<double>(s.contact_pixels()));
      CHECK(rec.counts.sum() == s.total_racs());
      CHECK(rec.total == s.total_racs());
    }
    const StandardShoe back = expand_pixel_record(aggregate(s, parts[0]), g);
    CHECK(back.S == s.S);
    CHECK(back.n == s.n);
  }
}

TEST_CASE("point_in_polygon") {
  const std::vector<Point> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(point_in_polygon({0.5, 0.5}, sq));
  CHECK_FALSE(point_in_polygon({1.5, 0.5}, sq));
}
