#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "racint/shoe_data.hpp"

namespace racint {

/// Binary outcomes of one cluster (shoe): the units are pixels (or any other
/// observation index understood by a DesignFn) and y marks the cases.
struct ClusterSample {
  std::string id;
  std::vector<int> unit;
  std::vector<std::uint8_t> y;

  std::size_t size() const { return unit.size(); }
  long cases() const;
};

/// One stratum of a clustered logistic model: design rows, binary outcomes and
/// a per-row offset on the linear predictor.
struct Stratum {
  std::string id;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd offset;

  Eigen::Index rows() const { return X.rows(); }
  double cases() const { return y.sum(); }
};

/// Writes the design row for `unit` into `row` (pre-sized to the design width).
using DesignFn = std::function<void(int unit, Eigen::Ref<Eigen::VectorXd> row)>;

/// Contact pixels of a shoe as a cluster; the unit is the row-major pixel index
/// and y = 1 where the shoe has a RAC (counts above 1 are treated as 1).
ClusterSample contact_pixels(const StandardShoe& shoe);

/// Builds strata from clusters; offsets[i] is the (constant) offset of cluster i.
std::vector<Stratum> build_strata(std::span<const ClusterSample> clusters,
                                  std::span<const double> offsets, Eigen::Index design_dim,
                                  const DesignFn& design);

/// Design function for the tensor-product spline at pixel centres of `grid`.
/// When `drop_intercept` is set the (1,1) column is omitted.
DesignFn spline_design(GridDims grid, Eigen::VectorXd knots_x, Eigen::VectorXd knots_y,
                       bool drop_intercept);

}  // namespace racint
