#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace racint {

using Point = Eigen::Vector2d;
using ContactMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using CountMatrix = Eigen::MatrixXi;

/// Standardized grid size in pixels. 397x307 is the resolution used for the
/// main analysis; some summaries quote 395x307, so this is never hard-coded.
struct GridDims {
  int height = 397;
  int width = 307;

  long size() const { return static_cast<long>(height) * width; }
  bool operator==(const GridDims&) const = default;
};

/// A lab print in image pixel coordinates: x is the column, y the row (pointing
/// down). The mask is indexed (row, col).
struct RawPrint {
  std::string print_id;
  Point landmark_top = Point::Zero();
  Point landmark_bottom = Point::Zero();
  std::vector<Point> rac_points;  // RAC centres of gravity
  ContactMask contact_mask;
  bool is_right_shoe = false;
};

/// A shoe on the standardized grid. Row 0 is the toe end; column 0 is the
/// negative-x side of the standardized frame.
struct StandardShoe {
  std::string shoe_id;
  ContactMask S;  // contact indicator per pixel
  CountMatrix n;  // RAC count per pixel

  GridDims dims() const { return {static_cast<int>(S.rows()), static_cast<int>(S.cols())}; }
  long contact_pixels() const;
  long total_racs() const { return n.sum(); }
};

/// One shoe's contact areas and RAC counts aggregated onto a partition.
struct ShoeRecord {
  std::string shoe_id;
  Eigen::VectorXd s_area;  // S_ij = |B_i ∩ A_j|
  Eigen::VectorXi counts;  // n_ij
  long total = 0;          // n_i

  Eigen::Index cells() const { return s_area.size(); }
};

/// Checks the ShoeRecord invariants (zero area implies zero count, total is the
/// sum of counts); throws invalid-input otherwise.
void validate(const ShoeRecord& rec);

/// Throws invalid-input unless S and n agree in shape, S is 0/1, n >= 0 and
/// S == 0 implies n == 0.
void validate(const StandardShoe& shoe);

/// Sets S = 1 wherever n >= 1 (RACs that tore the sole still mark contact).
/// Returns the number of pixels changed.
int mark_rac_pixels_as_contact(StandardShoe& shoe);

// --- coordinate normalization --------------------------------------------

/// Image -> standardized frame: origin at the landmark midpoint, the
/// bottom->top direction along +y, unit length equal to the landmark distance,
/// and x mirrored for right shoes so that every print reads as a left shoe.
Eigen::Affine2d standardizing_transform(const RawPrint& raw);

Point to_standard(const RawPrint& raw, const Point& image_point);

/// Standardized coordinates of the centre of grid pixel (row, col).
Point pixel_center(GridDims grid, int row, int col);

/// Grid pixel containing a standardized point, or nullopt if it lies outside
/// the grid. A point on a boundary between two pixels goes to the lower index.
std::optional<std::pair<int, int>> pixel_of(GridDims grid, const Point& standardized);

StandardShoe normalize(const RawPrint& raw, GridDims grid = {});

struct BinarizeResult {
  StandardShoe shoe;
  int modified = 0;
};

/// Caps every pixel count at 1.
BinarizeResult binarize_counts(StandardShoe shoe);

// --- descriptive statistics ---------------------------------------------

struct StatsReport {
  GridDims grid;
  std::vector<std::string> shoe_ids;
  std::vector<long> racs_per_shoe;
  std::vector<long> contact_per_shoe;
  Eigen::MatrixXi cumulative_contact;
  std::optional<double> spearman_contact_vs_racs;  // nullopt when ranks are degenerate
};

StatsReport descriptive_stats(std::span<const StandardShoe> shoes);

/// Spearman rank correlation with average ranks for ties. nullopt when either
/// sample has zero rank variance.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Average (mid) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace racint
