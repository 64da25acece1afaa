#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "racint/shoe_data.hpp"

namespace racint {

enum class PartitionKind { kPixel, kRegion };

struct Cell {
  int cell_id = 0;
  std::vector<int> pixels;  // row-major linear indices: row * width + col
  Point centroid = Point::Zero();  // standardized coordinates
};

/// Disjoint cells covering the standardized grid.
///
/// `label` maps each row-major pixel to its cell. The pixel partition does not
/// materialize per-cell pixel lists (there would be one per pixel); use
/// `cell_pixels` for uniform access.
struct Partition {
  std::string partition_id;
  PartitionKind kind = PartitionKind::kRegion;
  GridDims grid;
  Eigen::VectorXi label;
  std::vector<Cell> cells;  // empty for pixel partitions

  int cell_count() const {
    return kind == PartitionKind::kPixel ? static_cast<int>(grid.size())
                                         : static_cast<int>(cells.size());
  }
  std::vector<int> cell_pixels(int cell) const;
  Point centroid(int cell) const;
  /// Number of pixels in each cell.
  Eigen::VectorXd cell_area() const;
};

Partition pixel_partition(GridDims grid);

/// Geometry of the 14 expert regions, in grid fractions (row fraction 0 is the
/// toe, column fraction 0 the first column).
///
/// `y_cuts` lists the six band edges [top, c1, c2, c3, c4, bottom]; a band
/// covers row fractions [y_cuts[b], y_cuts[b+1]). `x_cut` splits every band
/// into two halves. In band `pad_band` each half is further divided into the
/// part inside `pad_inner_poly` (a polygon in (column fraction, row fraction)
/// vertices) and the outer remainder, which is split again at the band's mid
/// row. Every other band contributes two regions, so the layout has
/// 4 * 2 + 2 * 3 = 14 cells.
struct RegionLayout {
  std::vector<double> y_cuts{0.0, 0.15, 0.40, 0.60, 0.80, 1.0};
  double x_cut = 0.5;
  int pad_band = 1;
  std::vector<Point> pad_inner_poly{{0.25, 0.20}, {0.75, 0.20}, {0.75, 0.35}, {0.25, 0.35}};
};

/// Builds the expert partition. Throws invalid-layout listing uncovered or
/// doubly covered pixels, or empty regions.
Partition expert_partition(const RegionLayout& layout, GridDims grid);

/// rows x cols rectangular blocks of (near) equal size.
Partition block_partition(GridDims grid, int rows, int cols);

/// Builds a region partition from an explicit per-pixel label vector with
/// labels 0..J-1. Throws invalid-layout on negative labels or empty cells.
Partition partition_from_labels(std::string id, GridDims grid, const Eigen::VectorXi& label);

ShoeRecord aggregate(const StandardShoe& shoe, const Partition& part);

std::vector<ShoeRecord> aggregate_all(std::span<const StandardShoe> shoes, const Partition& part);

/// Inverse of aggregate on the pixel partition.
StandardShoe expand_pixel_record(const ShoeRecord& rec, GridDims grid);

bool point_in_polygon(const Point& p, const std::vector<Point>& poly);

}  // namespace racint
