#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "racint/estimators_pixel.hpp"
#include "racint/estimators_region.hpp"
#include "racint/partitioning.hpp"
#include "racint/shoe_data.hpp"
#include "racint/simulation.hpp"
#include "racint/spline_basis.hpp"
#include "racint/subsampling.hpp"

namespace racint {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Provenance block written into every artifact.
struct Provenance {
  std::string version;
  Json config = Json::object();

  Json to_json() const;
  /// One-line "# racint <version> <config>" header for text formats.
  std::string comment() const;
};

/// Round-trip formatting of a double ("NA" for NaN).
std::string format_double(double v);

// --- shoes ------------------------------------------------------------------

/// CSV with header shoe_id,x,y,S,n (x = column, y = row); absent pixels have
/// S = 0, n = 0. Shoes keep their order of first appearance. Lines starting
/// with '#' are ignored.
std::vector<StandardShoe> read_shoes_csv(const fs::path& path, GridDims grid);
void write_shoes_csv(const fs::path& path, std::span<const StandardShoe> shoes,
                     const Provenance* prov = nullptr);

/// JSON alternative: {"grid": {...}, "shoes": [{"shoe_id", "mask_rle", "racs"}]}
/// where mask_rle lists (start, length) runs of contact pixels in row-major order
/// and racs lists (row, col, count).
std::vector<StandardShoe> read_shoes_json(const fs::path& path);
void write_shoes_json(const fs::path& path, std::span<const StandardShoe> shoes,
                      const Provenance* prov = nullptr);

/// Dispatches on the extension (.csv or .json). The grid applies to CSV input.
std::vector<StandardShoe> load_shoes(const fs::path& path, GridDims grid);

Json mask_to_rle(const ContactMask& m);
ContactMask mask_from_rle(const Json& rle, GridDims grid);

/// A single raw print object or an array of them.
std::vector<RawPrint> read_raw_prints(const fs::path& path);
Json to_json(const RawPrint& raw);

// --- layouts, splines, metadata -------------------------------------------------

Json to_json(const RegionLayout& layout);
RegionLayout layout_from_json(const Json& j);
RegionLayout read_layout(const fs::path& path);

Json to_json(const SplineSpec& spec);
SplineSpec spline_from_json(const Json& j);

Json to_json(const SubsampleMeta& meta);
Json to_json(const Eigen::MatrixXd& m);
Json to_json(const Eigen::VectorXd& v);

Json to_json(const PixelFit& fit, bool include_surface = false);
Json to_json(const RegionFit& fit);
Json to_json(const StatsReport& rep);

Json to_json(const ComparisonTable& t);

Json to_json(const Scenario& sc);
Scenario scenario_from_json(const Json& j);
Scenario read_scenario(const fs::path& path);

// --- tables and images ------------------------------------------------------------

/// Grid CSV, one line per row; undefined entries written as NA.
void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m,
                      const Provenance* prov = nullptr);

/// ASCII PGM (P2), 0..255 scaled linearly between the smallest and largest
/// defined values; undefined entries are 0.
void write_pgm(const fs::path& path, const Eigen::MatrixXd& m, const Provenance* prov = nullptr);

/// scenario,method,cell,bias,mse
void write_comparison_csv(const fs::path& path, const ComparisonTable& t,
                          const Provenance* prov = nullptr);

/// scenario,method,mean_mse,mean_abs_bias,successes,failures
void write_summary_csv(const fs::path& path, const ComparisonTable& t,
                       const Provenance* prov = nullptr);

void write_json(const fs::path& path, const Json& j);
Json read_json(const fs::path& path);

}  // namespace racint
