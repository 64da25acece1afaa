#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "racint/shoe_data.hpp"

namespace racint {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Centering { kNone, kAsFit };

/// Tensor-product cubic spline surface g(x, y) = g_X(x) * g_Y(y) in the
/// truncated power basis. Coordinates are unit-square fractions of the grid
/// (x = column fraction, y = row fraction).
///
/// The basis is the displayed truncated-power cubic, not the
/// linearity-constrained "natural" cubic basis.
struct SplineSpec {
  Eigen::VectorXd knots_x;
  Eigen::VectorXd knots_y;
  Eigen::VectorXd beta;  // length design_dim(); beta[0] is the (1,1) intercept term
  Centering centering = Centering::kNone;
  bool intercept_identified = true;  // false for conditional fits

  Eigen::Index basis_dim_x() const { return 4 + knots_x.size(); }
  Eigen::Index basis_dim_y() const { return 4 + knots_y.size(); }
  Eigen::Index design_dim() const { return basis_dim_x() * basis_dim_y(); }
};

/// (1, t, t^2, t^3, (t-k_1)^3_+, ..., (t-k_p)^3_+).
template <typename Scalar>
VectorX<Scalar> basis_1d(Scalar t, const Eigen::Ref<const Eigen::VectorXd>& knots) {
  VectorX<Scalar> b(4 + knots.size());
  b[0] = Scalar(1);
  b[1] = t;
  b[2] = t * t;
  b[3] = t * t * t;
  for (Eigen::Index j = 0; j < knots.size(); ++j) {
    const Scalar d = t - Scalar(knots[j]);
    b[4 + j] = d > Scalar(0) ? d * d * d : Scalar(0);
  }
  return b;
}

/// Row of the tensor-product design: the outer product basis_x * basis_y^T
/// flattened x-major (index a * dim_y + b).
template <typename Scalar>
VectorX<Scalar> design_row(Scalar x, Scalar y, const Eigen::Ref<const Eigen::VectorXd>& knots_x,
                           const Eigen::Ref<const Eigen::VectorXd>& knots_y) {
  const VectorX<Scalar> bx = basis_1d(x, knots_x);
  const VectorX<Scalar> by = basis_1d(y, knots_y);
  VectorX<Scalar> row(bx.size() * by.size());
  for (Eigen::Index a = 0; a < bx.size(); ++a) {
    row.segment(a * by.size(), by.size()) = bx[a] * by;
  }
  return row;
}

inline Eigen::VectorXd design_row(const SplineSpec& spec, double x, double y) {
  return design_row<double>(x, y, spec.knots_x, spec.knots_y);
}

/// g(x, y) = design_row(x, y) . beta
double eval_surface(const SplineSpec& spec, double x, double y);

/// The p interior empirical quantiles at levels 1/(p+1), ..., p/(p+1), using
/// linear interpolation between order statistics (R's default, type 7).
/// Throws invalid-input if p < 1 or `values` has fewer than p + 1 distinct
/// entries.
Eigen::VectorXd quantile_knots(std::span<const double> values, int p);

/// Unit-square coordinates of a grid pixel centre.
inline Point unit_coords(GridDims grid, int row, int col) {
  return {(col + 0.5) / grid.width, (row + 0.5) / grid.height};
}

/// Knots from the unit coordinates of every contact pixel of every shoe.
std::pair<Eigen::VectorXd, Eigen::VectorXd> contact_knots(std::span<const StandardShoe> shoes,
                                                          int knots_x, int knots_y);

void validate(const SplineSpec& spec);

}  // namespace racint
