#include "racint/stratified.hpp"

#include "racint/error.hpp"
#include "racint/spline_basis.hpp"

namespace racint {

long ClusterSample::cases() const {
  long c = 0;
  for (auto v : y) c += v;
  return c;
}

ClusterSample contact_pixels(const StandardShoe& shoe) {
  ClusterSample out;
  out.id = shoe.shoe_id;
  const GridDims g = shoe.dims();
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      if (!shoe.S(r, c)) continue;
      out.unit.push_back(r * g.width + c);
      out.y.push_back(shoe.n(r, c) > 0 ? 1 : 0);
    }
  }
  return out;
}

std::vector<Stratum> build_strata(std::span<const ClusterSample> clusters,
                                  std::span<const double> offsets, Eigen::Index design_dim,
                                  const DesignFn& design) {
  require(offsets.size() == clusters.size(), "build_strata: one offset per cluster required");
  std::vector<Stratum> strata;
  strata.reserve(clusters.size());
  Eigen::VectorXd row(design_dim);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    Stratum s;
    s.id = c.id;
    const auto n = static_cast<Eigen::Index>(c.size());
    s.X.resize(n, design_dim);
    s.y.resize(n);
    s.offset = Eigen::VectorXd::Constant(n, offsets[i]);
    for (Eigen::Index k = 0; k < n; ++k) {
      design(c.unit[static_cast<std::size_t>(k)], row);
      s.X.row(k) = row.transpose();
      s.y[k] = c.y[static_cast<std::size_t>(k)];
    }
    strata.push_back(std::move(s));
  }
  return strata;
}

DesignFn spline_design(GridDims grid, Eigen::VectorXd knots_x, Eigen::VectorXd knots_y,
                       bool drop_intercept) {
  return [grid, kx = std::move(knots_x), ky = std::move(knots_y),
          drop_intercept](int unit, Eigen::Ref<Eigen::VectorXd> row) {
    const Point u = unit_coords(grid, unit / grid.width, unit % grid.width);
    const Eigen::VectorXd full = design_row<double>(u.x(), u.y(), kx, ky);
    if (drop_intercept) {
      row = full.tail(full.size() - 1);
    } else {
      row = full;
    }
  };
}

}  // namespace racint
