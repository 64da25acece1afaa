#include "racint/spline_basis.hpp"

#include <algorithm>
#include <cmath>

#include "racint/error.hpp"

namespace racint {

double eval_surface(const SplineSpec& spec, double x, double y) {
  return design_row(spec, x, y).dot(spec.beta);
}

Eigen::VectorXd quantile_knots(std::span<const double> values, int p) {
  require(p >= 1, "quantile_knots: need at least one knot");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  long n_distinct = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i == 0 || v[i] != v[i - 1]) ++n_distinct;
  }
  require(n_distinct >= p + 1, "quantile_knots: values are degenerate");

  Eigen::VectorXd knots(p);
  const double n = static_cast<double>(v.size());
  for (int k = 1; k <= p; ++k) {
    const double h = (n - 1.0) * k / (p + 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    knots[k - 1] = v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
  }
  return knots;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> contact_knots(std::span<const StandardShoe> shoes,
                                                          int knots_x, int knots_y) {
  std::vector<double> xs, ys;
  for (const auto& s : shoes) {
    const GridDims g = s.dims();
    for (int c = 0; c < g.width; ++c) {
      for (int r = 0; r < g.height; ++r) {
        if (!s.S(r, c)) continue;
        const Point u = unit_coords(g, r, c);
        xs.push_back(u.x());
        ys.push_back(u.y());
      }
    }
  }
  return {quantile_knots(xs, knots_x), quantile_knots(ys, knots_y)};
}

void validate(const SplineSpec& spec) {
  auto increasing = [](const Eigen::VectorXd& k) {
    for (Eigen::Index i = 1; i < k.size(); ++i) {
      if (!(k[i] > k[i - 1])) return false;
    }
    return true;
  };
  require(increasing(spec.knots_x), "spline: x knots must be strictly increasing");
  require(increasing(spec.knots_y), "spline: y knots must be strictly increasing");
  require(spec.beta.size() == spec.design_dim(), "spline: beta length does not match the basis");
}

}  // namespace racint
