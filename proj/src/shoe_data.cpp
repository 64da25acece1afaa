#include "racint/shoe_data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "racint/error.hpp"

namespace racint {

long StandardShoe::contact_pixels() const {
  return S.cast<long>().sum();
}

void validate(const ShoeRecord& rec) {
  require(rec.s_area.size() == rec.counts.size(),
          "shoe " + rec.shoe_id + ": s_area and counts differ in length");
  long total = 0;
  for (Eigen::Index j = 0; j < rec.counts.size(); ++j) {
    require(rec.s_area[j] >= 0.0 && std::isfinite(rec.s_area[j]),
            "shoe " + rec.shoe_id + ": negative or non-finite contact area");
    require(rec.counts[j] >= 0, "shoe " + rec.shoe_id + ": negative count");
    require(!(rec.s_area[j] == 0.0 && rec.counts[j] > 0),
            "shoe " + rec.shoe_id + ": RACs in cell " + std::to_string(j) +
                " without contact surface");
    total += rec.counts[j];
  }
  require(total == rec.total, "shoe " + rec.shoe_id + ": total does not match counts");
}

void validate(const StandardShoe& shoe) {
  require(shoe.S.rows() == shoe.n.rows() && shoe.S.cols() == shoe.n.cols(),
          "shoe " + shoe.shoe_id + ": S and n dimensions differ");
  for (Eigen::Index c = 0; c < shoe.S.cols(); ++c) {
    for (Eigen::Index r = 0; r < shoe.S.rows(); ++r) {
      const int s = shoe.S(r, c);
      const int n = shoe.n(r, c);
      if (s > 1 || n < 0 || (s == 0 && n > 0)) {
        std::ostringstream os;
        os << "shoe " << shoe.shoe_id << ": invalid pixel (" << r << "," << c << ") S=" << s
           << " n=" << n;
        fail(ErrorKind::kInvalidInput, os.str());
      }
    }
  }
}

int mark_rac_pixels_as_contact(StandardShoe& shoe) {
  int changed = 0;
  for (Eigen::Index c = 0; c < shoe.n.cols(); ++c) {
    for (Eigen::Index r = 0; r < shoe.n.rows(); ++r) {
      if (shoe.n(r, c) > 0 && shoe.S(r, c) == 0) {
        shoe.S(r, c) = 1;
        ++changed;
      }
    }
  }
  return changed;
}

Eigen::Affine2d standardizing_transform(const RawPrint& raw) {
  // Image y points down; flip it first so the remaining steps are a proper
  // rotation in a right-handed frame.
  const Eigen::DiagonalMatrix<double, 2> flip_y(1.0, -1.0);
  const Point top = flip_y * raw.landmark_top;
  const Point bottom = flip_y * raw.landmark_bottom;
  const Point axis = top - bottom;
  const double length = axis.norm();
  if (!(length > 0.0) || !std::isfinite(length)) {
    fail(ErrorKind::kInvalidInput, "print " + raw.print_id + ": landmarks coincide");
  }
  const Point origin = 0.5 * (top + bottom);
  const double angle = std::atan2(axis.y(), axis.x());

  Eigen::Affine2d t = Eigen::Affine2d::Identity();
  t.prescale(Eigen::Vector2d(1.0, -1.0));
  t.pretranslate(-origin);
  t.prerotate(Eigen::Rotation2Dd(M_PI / 2.0 - angle));
  t.prescale(1.0 / length);
  if (raw.is_right_shoe) t.prescale(Eigen::Vector2d(-1.0, 1.0));
  return t;
}

Point to_standard(const RawPrint& raw, const Point& image_point) {
  return standardizing_transform(raw) * image_point;
}

Point pixel_center(GridDims grid, int row, int col) {
  const double h = grid.height;
  return {(col + 0.5 - 0.5 * grid.width) / h, 0.5 - (row + 0.5) / h};
}

namespace {

// Index of the unit cell containing s in [0, extent]; integer-valued s (a cell
// boundary) is assigned to the lower cell.
std::optional<int> cell_index(double s, int extent) {
  if (!(s >= 0.0) || s > extent) return std::nullopt;
  if (s == 0.0) return 0;
  return static_cast<int>(std::ceil(s)) - 1;
}

}  // namespace

std::optional<std::pair<int, int>> pixel_of(GridDims grid, const Point& p) {
  const double h = grid.height;
  const auto row = cell_index((0.5 - p.y()) * h, grid.height);
  const auto col = cell_index(p.x() * h + 0.5 * grid.width, grid.width);
  if (!row || !col) return std::nullopt;
  return std::make_pair(*row, *col);
}

StandardShoe normalize(const RawPrint& raw, GridDims grid) {
  require(grid.height > 0 && grid.width > 0, "grid dimensions must be positive");
  const auto rows = raw.contact_mask.rows();
  const auto cols = raw.contact_mask.cols();
  for (std::size_t k = 0; k < raw.rac_points.size(); ++k) {
    const Point& p = raw.rac_points[k];
    require(p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= cols && p.y() <= rows,
            "print " + raw.print_id + ": RAC " + std::to_string(k) + " outside the image");
  }

  const Eigen::Affine2d forward = standardizing_transform(raw);
  const Eigen::Affine2d inverse = forward.inverse();

  StandardShoe out;
  out.shoe_id = raw.print_id;
  out.S = ContactMask::Zero(grid.height, grid.width);
  out.n = CountMatrix::Zero(grid.height, grid.width);

  // Pull the mask back through the inverse map so every grid pixel is sampled
  // exactly once.
  for (int c = 0; c < grid.width; ++c) {
    for (int r = 0; r < grid.height; ++r) {
      const Point img = inverse * pixel_center(grid, r, c);
      const double ix = std::floor(img.x());
      const double iy = std::floor(img.y());
      if (ix < 0 || iy < 0 || ix >= cols || iy >= rows) continue;
      if (raw.contact_mask(static_cast<Eigen::Index>(iy), static_cast<Eigen::Index>(ix))) {
        out.S(r, c) = 1;
      }
    }
  }

  for (std::size_t k = 0; k < raw.rac_points.size(); ++k) {
    const Point s = forward * raw.rac_points[k];
    const auto px = pixel_of(grid, s);
    if (!px) {
      std::ostringstream os;
      os << "print " << raw.print_id << ": RAC " << k << " at image (" << raw.rac_points[k].x()
         << "," << raw.rac_points[k].y() << ") maps to standardized (" << s.x() << "," << s.y()
         << ") outside the grid";
      fail(ErrorKind::kOutOfDomain, os.str());
    }
    out.n(px->first, px->second) += 1;
  }
  mark_rac_pixels_as_contact(out);
  return out;
}

BinarizeResult binarize_counts(StandardShoe shoe) {
  BinarizeResult res;
  for (Eigen::Index c = 0; c < shoe.n.cols(); ++c) {
    for (Eigen::Index r = 0; r < shoe.n.rows(); ++r) {
      if (shoe.n(r, c) >= 2) {
        shoe.n(r, c) = 1;
        ++res.modified;
      }
    }
  }
  res.shoe = std::move(shoe);
  return res;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "spearman: samples differ in length");
  if (x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const Eigen::Map<const Eigen::VectorXd> a(rx.data(), static_cast<Eigen::Index>(rx.size()));
  const Eigen::Map<const Eigen::VectorXd> b(ry.data(), static_cast<Eigen::Index>(ry.size()));
  const Eigen::VectorXd da = a.array() - a.mean();
  const Eigen::VectorXd db = b.array() - b.mean();
  const double saa = da.squaredNorm();
  const double sbb = db.squaredNorm();
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return da.dot(db) / std::sqrt(saa * sbb);
}

StatsReport descriptive_stats(std::span<const StandardShoe> shoes) {
  require(!shoes.empty(), "descriptive_stats: no shoes");
  StatsReport rep;
  rep.grid = shoes.front().dims();
  rep.cumulative_contact = Eigen::MatrixXi::Zero(rep.grid.height, rep.grid.width);
  std::vector<double> contact, racs;
  for (const auto& s : shoes) {
    validate(s);
    require(s.dims() == rep.grid, "descriptive_stats: shoes on different grids");
    rep.shoe_ids.push_back(s.shoe_id);
    rep.racs_per_shoe.push_back(s.total_racs());
    rep.contact_per_shoe.push_back(s.contact_pixels());
    rep.cumulative_contact += s.S.cast<int>();
    contact.push_back(static_cast<double>(rep.contact_per_shoe.back()));
    racs.push_back(static_cast<double>(rep.racs_per_shoe.back()));
  }
  rep.spearman_contact_vs_racs = spearman(contact, racs);
  return rep;
}

}  // namespace racint
