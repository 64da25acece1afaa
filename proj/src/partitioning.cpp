#include "racint/partitioning.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "racint/error.hpp"

namespace racint {

std::vector<int> Partition::cell_pixels(int cell) const {
  if (kind == PartitionKind::kPixel) return {cell};
  return cells.at(static_cast<std::size_t>(cell)).pixels;
}

Point Partition::centroid(int cell) const {
  if (kind == PartitionKind::kPixel) {
    return pixel_center(grid, cell / grid.width, cell % grid.width);
  }
  return cells.at(static_cast<std::size_t>(cell)).centroid;
}

Eigen::VectorXd Partition::cell_area() const {
  if (kind == PartitionKind::kPixel) return Eigen::VectorXd::Ones(grid.size());
  Eigen::VectorXd area(static_cast<Eigen::Index>(cells.size()));
  for (std::size_t j = 0; j < cells.size(); ++j) {
    area[static_cast<Eigen::Index>(j)] = static_cast<double>(cells[j].pixels.size());
  }
  return area;
}

Partition pixel_partition(GridDims grid) {
  require(grid.height > 0 && grid.width > 0, "grid dimensions must be positive");
  Partition p;
  p.partition_id = "pixel";
  p.kind = PartitionKind::kPixel;
  p.grid = grid;
  p.label.resize(grid.size());
  std::iota(p.label.begin(), p.label.end(), 0);
  return p;
}

Partition partition_from_labels(std::string id, GridDims grid, const Eigen::VectorXi& label) {
  require(label.size() == grid.size(), "label vector does not match the grid");
  if (label.minCoeff() < 0) fail(ErrorKind::kInvalidLayout, id + ": negative label");
  const int cells = label.maxCoeff() + 1;
  Partition p;
  p.partition_id = std::move(id);
  p.kind = PartitionKind::kRegion;
  p.grid = grid;
  p.label = label;
  p.cells.resize(static_cast<std::size_t>(cells));
  for (int j = 0; j < cells; ++j) p.cells[static_cast<std::size_t>(j)].cell_id = j;
  for (int k = 0; k < label.size(); ++k) {
    auto& cell = p.cells[static_cast<std::size_t>(label[k])];
    cell.pixels.push_back(k);
    cell.centroid += pixel_center(grid, k / grid.width, k % grid.width);
  }
  for (auto& cell : p.cells) {
    if (cell.pixels.empty()) {
      fail(ErrorKind::kInvalidLayout,
           p.partition_id + ": region " + std::to_string(cell.cell_id) + " is empty");
    }
    cell.centroid /= static_cast<double>(cell.pixels.size());
  }
  return p;
}

bool point_in_polygon(const Point& p, const std::vector<Point>& poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

Partition expert_partition(const RegionLayout& layout, GridDims grid) {
  require(grid.height > 0 && grid.width > 0, "grid dimensions must be positive");
  if (layout.y_cuts.size() != 6) {
    fail(ErrorKind::kInvalidLayout, "expert layout needs 6 band edges (5 bands)");
  }
  if (layout.pad_band < 0 || layout.pad_band > 4) {
    fail(ErrorKind::kInvalidLayout, "pad_band must be in 0..4");
  }
  if (layout.pad_inner_poly.size() < 3) {
    fail(ErrorKind::kInvalidLayout, "pad_inner_poly needs at least 3 vertices");
  }

  // Region numbering: bands top to bottom; within a band the first half comes
  // first. The pad band contributes (outer-upper, outer-lower, inner) per half.
  std::vector<int> band_base(5);
  int next = 0;
  for (int b = 0; b < 5; ++b) {
    band_base[static_cast<std::size_t>(b)] = next;
    next += b == layout.pad_band ? 6 : 2;
  }

  Eigen::VectorXi label = Eigen::VectorXi::Constant(grid.size(), -1);
  std::vector<int> uncovered, overlapping;
  const double pad_lo = layout.y_cuts[static_cast<std::size_t>(layout.pad_band)];
  const double pad_hi = layout.y_cuts[static_cast<std::size_t>(layout.pad_band) + 1];
  const double pad_mid = 0.5 * (pad_lo + pad_hi);
  for (int r = 0; r < grid.height; ++r) {
    const double v = (r + 0.5) / grid.height;
    for (int c = 0; c < grid.width; ++c) {
      const double u = (c + 0.5) / grid.width;
      const int k = r * grid.width + c;
      int hits = 0;
      int band = -1;
      for (int b = 0; b < 5; ++b) {
        const double lo = layout.y_cuts[static_cast<std::size_t>(b)];
        const double hi = layout.y_cuts[static_cast<std::size_t>(b) + 1];
        if (v >= lo && v < hi) {
          ++hits;
          band = b;
        }
      }
      if (hits == 0) {
        uncovered.push_back(k);
        continue;
      }
      if (hits > 1) {
        overlapping.push_back(k);
        continue;
      }
      const int half = u < layout.x_cut ? 0 : 1;
      const int base = band_base[static_cast<std::size_t>(band)];
      if (band != layout.pad_band) {
        label[k] = base + half;
      } else {
        int zone;
        if (point_in_polygon({u, v}, layout.pad_inner_poly)) {
          zone = 2;
        } else {
          zone = v < pad_mid ? 0 : 1;
        }
        label[k] = base + 3 * half + zone;
      }
    }
  }

  if (!uncovered.empty() || !overlapping.empty()) {
    std::ostringstream os;
    auto list = [&](const char* what, const std::vector<int>& px) {
      if (px.empty()) return;
      os << " " << px.size() << " " << what << " pixel(s):";
      for (std::size_t i = 0; i < std::min<std::size_t>(px.size(), 10); ++i) {
        os << " (" << px[i] / grid.width << "," << px[i] % grid.width << ")";
      }
      if (px.size() > 10) os << " ...";
    };
    os << "expert layout does not tile the grid;";
    list("uncovered", uncovered);
    list("overlapping", overlapping);
    fail(ErrorKind::kInvalidLayout, os.str());
  }
  return partition_from_labels("expert14", grid, label);
}

Partition block_partition(GridDims grid, int rows, int cols) {
  require(rows > 0 && cols > 0 && rows <= grid.height && cols <= grid.width,
          "block partition dimensions out of range");
  Eigen::VectorXi label(grid.size());
  for (int r = 0; r < grid.height; ++r) {
    const int br = static_cast<int>(static_cast<long>(r) * rows / grid.height);
    for (int c = 0; c < grid.width; ++c) {
      const int bc = static_cast<int>(static_cast<long>(c) * cols / grid.width);
      label[r * grid.width + c] = br * cols + bc;
    }
  }
  return partition_from_labels("blocks" + std::to_string(rows) + "x" + std::to_string(cols), grid,
                               label);
}

ShoeRecord aggregate(const StandardShoe& shoe, const Partition& part) {
  if (!(shoe.dims() == part.grid)) {
    fail(ErrorKind::kInvalidInput, "shoe " + shoe.shoe_id + " grid does not match partition");
  }
  const int cells = part.cell_count();
  ShoeRecord rec;
  rec.shoe_id = shoe.shoe_id;
  rec.s_area = Eigen::VectorXd::Zero(cells);
  rec.counts = Eigen::VectorXi::Zero(cells);
  const int w = part.grid.width;
  for (int r = 0; r < part.grid.height; ++r) {
    for (int c = 0; c < w; ++c) {
      const int j = part.label[r * w + c];
      rec.s_area[j] += shoe.S(r, c);
      rec.counts[j] += shoe.n(r, c);
    }
  }
  rec.total = rec.counts.sum();
  return rec;
}

std::vector<ShoeRecord> aggregate_all(std::span<const StandardShoe> shoes, const Partition& part) {
  std::vector<ShoeRecord> out;
  out.reserve(shoes.size());
  for (const auto& s : shoes) out.push_back(aggregate(s, part));
  return out;
}

StandardShoe expand_pixel_record(const ShoeRecord& rec, GridDims grid) {
  require(rec.cells() == grid.size(), "record does not match the pixel grid");
  StandardShoe s;
  s.shoe_id = rec.shoe_id;
  s.S = ContactMask::Zero(grid.height, grid.width);
  s.n = CountMatrix::Zero(grid.height, grid.width);
  for (Eigen::Index k = 0; k < rec.cells(); ++k) {
    const auto r = k / grid.width;
    const auto c = k % grid.width;
    s.S(r, c) = static_cast<std::uint8_t>(rec.s_area[k]);
    s.n(r, c) = rec.counts[k];
  }
  return s;
}

}  // namespace racint
