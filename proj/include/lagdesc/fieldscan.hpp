#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lagdesc/descriptors.hpp"
#include "lagdesc/error.hpp"
#include "lagdesc/integrate.hpp"
#include "lagdesc/systems.hpp"

namespace lagdesc {

/// Axis-aligned box of dimension 2 or 3.
struct Region {
  std::vector<Interval> axes;

  std::size_t dimension() const { return axes.size(); }

  void validate() const {
    if (axes.size() < 2 || axes.size() > 3) throw Error(ErrorKind::InvalidArgument, "regions must be 2D or 3D");
    for (const auto& a : axes)
      if (!(a.lo < a.hi)) throw Error(ErrorKind::InvalidArgument, "region axis needs min < max");
  }

  bool contains(std::span<const double> p) const {
    if (p.size() != axes.size()) return false;
    for (std::size_t i = 0; i < axes.size(); ++i)
      if (p[i] < axes[i].lo || p[i] > axes[i].hi) return false;
    return true;
  }
};

struct CellFailure {
  std::size_t index;
  std::string tag;
};

/// Descriptor values on the nodes of a rectangular grid. Nodes include the region
/// boundary; x varies fastest. Failed nodes hold NaN and are listed in `failures`.
struct ScalarField {
  Region region;
  std::vector<std::size_t> resolution;
  std::vector<double> values;
  DescriptorSpec spec;
  std::vector<CellFailure> failures;

  std::size_t size() const {
    return std::accumulate(resolution.begin(), resolution.end(), std::size_t{1}, std::multiplies<>());
  }

  double coordinate(std::size_t axis, std::size_t i) const {
    const auto& a = region.axes[axis];
    const std::size_t n = resolution[axis];
    if (i + 1 == n) return a.hi;
    return a.lo + (a.hi - a.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }

  double spacing(std::size_t axis) const {
    return (region.axes[axis].hi - region.axes[axis].lo) / static_cast<double>(resolution[axis] - 1);
  }

  std::vector<std::size_t> unravel(std::size_t index) const {
    std::vector<std::size_t> idx(resolution.size());
    for (std::size_t a = 0; a < resolution.size(); ++a) {
      idx[a] = index % resolution[a];
      index /= resolution[a];
    }
    return idx;
  }

  State node(std::size_t index) const {
    const auto idx = unravel(index);
    State p(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) p[a] = coordinate(a, idx[a]);
    return p;
  }

  double at(std::size_t ix, std::size_t iy) const { return values[iy * resolution[0] + ix]; }
};

using Point2 = std::array<double, 2>;
using Polyline = std::vector<Point2>;

struct ContourSet {
  std::vector<double> levels;
  std::vector<std::vector<Polyline>> polylines;  // one list per level
};

namespace detail {

inline void validate_grid(const Region& region, std::span<const std::size_t> resolution) {
  region.validate();
  if (resolution.size() != region.dimension())
    throw Error(ErrorKind::InvalidArgument, "resolution must list one count per region axis");
  for (auto r : resolution)
    if (r < 2) throw Error(ErrorKind::InvalidArgument, "resolution must be at least 2 per axis");
}

/// Evaluates `fn` at every node. Each node writes only its own slot, so the
/// result does not depend on the number of workers or on scheduling.
inline ScalarField sweep_nodes(const Region& region, std::span<const std::size_t> resolution, unsigned workers,
                               const DescriptorSpec& spec, const std::function<double(std::span<const double>)>& fn) {
  validate_grid(region, resolution);
  ScalarField field;
  field.region = region;
  field.resolution.assign(resolution.begin(), resolution.end());
  field.spec = spec;
  const std::size_t total = field.size();
  field.values.assign(total, std::numeric_limits<double>::quiet_NaN());

  std::atomic<std::size_t> next{0};
  std::mutex failures_mutex;
  constexpr std::size_t chunk = 16;

  auto work = [&] {
    std::vector<CellFailure> local;
    State p;
    for (;;) {
      const std::size_t begin = next.fetch_add(chunk);
      if (begin >= total) break;
      const std::size_t end = std::min(total, begin + chunk);
      for (std::size_t i = begin; i < end; ++i) {
        p = field.node(i);
        try {
          field.values[i] = fn(p);
        } catch (const Error& e) {
          local.push_back({i, std::string(e.tag())});
        }
      }
    }
    std::lock_guard lock(failures_mutex);
    field.failures.insert(field.failures.end(), local.begin(), local.end());
  };

  const unsigned n = std::max(1u, workers);
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
  }

  std::sort(field.failures.begin(), field.failures.end(),
            [](const CellFailure& a, const CellFailure& b) { return a.index < b.index; });
  if (field.failures.size() * 10 > total)
    throw Error(ErrorKind::SweepAborted, std::to_string(field.failures.size()) + " of " + std::to_string(total) +
                                             " cells failed (first: " + field.failures.front().tag + ")");
  return field;
}

}  // namespace detail

/// Evaluates a continuous descriptor on every grid node.
inline ScalarField sweep(const FlowSystem& sys, const DescriptorSpec& spec, const Region& region,
                         std::span<const std::size_t> resolution, const IntegratorConfig& cfg = {},
                         unsigned workers = 1) {
  spec.validate();
  if (region.dimension() != sys.dimension)
    throw Error(ErrorKind::InvalidArgument, "region dimension must match the system dimension");
  return detail::sweep_nodes(region, resolution, workers, spec,
                             [&](std::span<const double> x) { return evaluate(sys, spec, x, cfg); });
}

/// MD_p over a planar grid.
inline ScalarField sweep(const DiscreteMap2D& map, const DescriptorSpec& spec, const Region& region,
                         std::span<const std::size_t> resolution, unsigned workers = 1) {
  spec.validate();
  if (region.dimension() != 2) throw Error(ErrorKind::InvalidArgument, "maps are planar");
  return detail::sweep_nodes(region, resolution, workers, spec,
                             [&](std::span<const double> x) { return evaluate(map, spec, x); });
}

/// Bilinear interpolation of a 2D field at (x, y).
inline double bilinear(const ScalarField& f, double x, double y) {
  const double fx = (x - f.region.axes[0].lo) / f.spacing(0);
  const double fy = (y - f.region.axes[1].lo) / f.spacing(1);
  const auto nx = f.resolution[0], ny = f.resolution[1];
  auto clamp_cell = [](double v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(std::floor(v), 0.0, static_cast<double>(n - 2)));
  };
  const std::size_t i = clamp_cell(fx, nx), j = clamp_cell(fy, ny);
  const double u = fx - static_cast<double>(i), v = fy - static_cast<double>(j);
  return (1 - u) * (1 - v) * f.at(i, j) + u * (1 - v) * f.at(i + 1, j) + u * v * f.at(i + 1, j + 1) +
         (1 - u) * v * f.at(i, j + 1);
}

namespace detail {

// Edge numbering within a cell: 0 bottom, 1 right, 2 top, 3 left.
// Returns up to two segments as edge pairs.
inline int cell_segments(int code, bool center_high, std::array<std::array<int, 2>, 2>& seg) {
  switch (code) {
    case 0:
    case 15: return 0;
    case 1: case 14: seg[0] = {3, 0}; return 1;
    case 2: case 13: seg[0] = {0, 1}; return 1;
    case 3: case 12: seg[0] = {3, 1}; return 1;
    case 4: case 11: seg[0] = {1, 2}; return 1;
    case 6: case 9: seg[0] = {0, 2}; return 1;
    case 7: case 8: seg[0] = {3, 2}; return 1;
    case 5:
      if (center_high) { seg[0] = {0, 1}; seg[1] = {2, 3}; }
      else { seg[0] = {3, 0}; seg[1] = {1, 2}; }
      return 2;
    case 10:
      if (center_high) { seg[0] = {3, 0}; seg[1] = {1, 2}; }
      else { seg[0] = {0, 1}; seg[1] = {2, 3}; }
      return 2;
    default: return 0;
  }
}

inline std::vector<Polyline> trace_level(const ScalarField& f, double level) {
  const std::size_t nx = f.resolution[0], ny = f.resolution[1];
  const std::size_t h_edges = (nx - 1) * ny;
  auto h_id = [&](std::size_t i, std::size_t j) { return j * (nx - 1) + i; };
  auto v_id = [&](std::size_t i, std::size_t j) { return h_edges + j * nx + i; };

  std::unordered_map<std::size_t, Point2> vertex;
  auto edge_point = [&](std::size_t id) -> Point2 {
    if (auto it = vertex.find(id); it != vertex.end()) return it->second;
    Point2 p;
    if (id < h_edges) {
      const std::size_t j = id / (nx - 1), i = id % (nx - 1);
      const double a = f.at(i, j), b = f.at(i + 1, j);
      const double t = (level - a) / (b - a);
      const double x0 = f.coordinate(0, i), x1 = f.coordinate(0, i + 1);
      p = {x0 + t * (x1 - x0), f.coordinate(1, j)};
    } else {
      const std::size_t k = id - h_edges;
      const std::size_t j = k / nx, i = k % nx;
      const double a = f.at(i, j), b = f.at(i, j + 1);
      const double t = (level - a) / (b - a);
      const double y0 = f.coordinate(1, j), y1 = f.coordinate(1, j + 1);
      p = {f.coordinate(0, i), y0 + t * (y1 - y0)};
    }
    vertex.emplace(id, p);
    return p;
  };

  std::vector<std::array<std::size_t, 2>> segments;
  std::array<std::array<int, 2>, 2> seg{};
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const double v00 = f.at(i, j), v10 = f.at(i + 1, j), v11 = f.at(i + 1, j + 1), v01 = f.at(i, j + 1);
      if (std::isnan(v00) || std::isnan(v10) || std::isnan(v11) || std::isnan(v01)) continue;
      const int code = (v00 >= level ? 1 : 0) | (v10 >= level ? 2 : 0) | (v11 >= level ? 4 : 0) |
                       (v01 >= level ? 8 : 0);
      const bool center_high = 0.25 * (v00 + v10 + v11 + v01) >= level;
      const int count = cell_segments(code, center_high, seg);
      const std::array<std::size_t, 4> edges = {h_id(i, j), v_id(i + 1, j), h_id(i, j + 1), v_id(i, j)};
      for (int s = 0; s < count; ++s) segments.push_back({edges[seg[s][0]], edges[seg[s][1]]});
    }
  }

  // Chain segments through shared edges.
  std::unordered_map<std::size_t, std::vector<std::size_t>> incident;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    incident[segments[s][0]].push_back(s);
    incident[segments[s][1]].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);
  std::vector<Polyline> lines;

  auto walk = [&](std::size_t start_seg, std::size_t start_edge) {
    Polyline line;
    line.push_back(edge_point(start_edge));
    std::size_t s = start_seg, edge = start_edge;
    for (;;) {
      used[s] = true;
      const std::size_t other = segments[s][0] == edge ? segments[s][1] : segments[s][0];
      line.push_back(edge_point(other));
      edge = other;
      std::size_t next = segments.size();
      for (std::size_t cand : incident[edge])
        if (!used[cand]) {
          next = cand;
          break;
        }
      if (next == segments.size()) break;
      s = next;
    }
    lines.push_back(std::move(line));
  };

  // Open chains start at edges touched by a single segment.
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    for (std::size_t end = 0; end < 2; ++end) {
      if (incident[segments[s][end]].size() == 1) {
        walk(s, segments[s][end]);
        break;
      }
    }
  }
  for (std::size_t s = 0; s < segments.size(); ++s)
    if (!used[s]) walk(s, segments[s][0]);
  return lines;
}

}  // namespace detail

/// Marching squares with linear edge interpolation; saddle cells are resolved by
/// comparing the cell-center average against the level.
inline ContourSet contours(const ScalarField& field, std::span<const double> levels) {
  if (field.resolution.size() != 2) throw Error(ErrorKind::InvalidArgument, "contours need a 2D field");
  ContourSet out;
  out.levels.assign(levels.begin(), levels.end());
  for (double level : levels) out.polylines.push_back(detail::trace_level(field, level));
  return out;
}

inline std::pair<double, double> finite_range(const ScalarField& field) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : field.values)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return {lo, hi};
}

/// `count` equally spaced levels strictly inside the field's range.
inline std::vector<double> equal_levels(const ScalarField& field, std::size_t count) {
  const auto [lo, hi] = finite_range(field);
  std::vector<double> levels;
  for (std::size_t k = 1; k <= count; ++k)
    levels.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count + 1));
  return levels;
}

/// Levels at the k/(count+1) quantiles of the finite field values.
inline std::vector<double> quantile_levels(const ScalarField& field, std::size_t count) {
  std::vector<double> v;
  for (double x : field.values)
    if (std::isfinite(x)) v.push_back(x);
  std::sort(v.begin(), v.end());
  std::vector<double> levels;
  if (v.empty()) return levels;
  for (std::size_t k = 1; k <= count; ++k) {
    const double pos = static_cast<double>(k) / static_cast<double>(count + 1) * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    levels.push_back(i + 1 < v.size() ? v[i] + frac * (v[i + 1] - v[i]) : v[i]);
  }
  return levels;
}

struct ContourProbe {
  double level = 0.0;
  Polyline polyline;
  ScalarField field;
};

/// The contour of the descriptor through `point`: sweeps the region, fixes the
/// level at the point, and returns the polyline holding the vertex nearest to it.
inline ContourProbe contour_through(const FlowSystem& sys, const DescriptorSpec& spec, std::span<const double> point,
                                    const Region& region, std::span<const std::size_t> resolution,
                                    const IntegratorConfig& cfg = {}, unsigned workers = 1) {
  if (region.dimension() != 2) throw Error(ErrorKind::InvalidArgument, "contour_through needs a 2D region");
  if (!region.contains(point)) throw Error(ErrorKind::InvalidArgument, "probe point lies outside the region");
  ContourProbe probe;
  probe.field = sweep(sys, spec, region, resolution, cfg, workers);
  probe.level = evaluate(sys, spec, point, cfg);
  const std::array<double, 1> levels = {probe.level};
  auto set = contours(probe.field, levels);
  auto& lines = set.polylines.front();
  if (lines.empty()) throw Error(ErrorKind::EmptyContour, "no contour at the probe level");
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_line = 0;
  for (std::size_t l = 0; l < lines.size(); ++l)
    for (const auto& v : lines[l]) {
      const double dist = std::hypot(v[0] - point[0], v[1] - point[1]);
      if (dist < best) {
        best = dist;
        best_line = l;
      }
    }
  probe.polyline = std::move(lines[best_line]);
  return probe;
}

/// max y - min y over the polyline vertices whose x lies in `band`.
inline double horizontal_deviation(const Polyline& line, Interval band) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& v : line)
    if (v[0] >= band.lo && v[0] <= band.hi) {
      lo = std::min(lo, v[1]);
      hi = std::max(hi, v[1]);
    }
  if (!(hi >= lo)) throw Error(ErrorKind::EmptyBand, "no polyline vertices inside the x band");
  return hi - lo;
}

/// Central-difference gradient norm at interior nodes, one-sided on the boundary.
inline ScalarField gradient_magnitude(const ScalarField& f) {
  if (f.resolution.size() != 2) throw Error(ErrorKind::InvalidArgument, "gradient_magnitude needs a 2D field");
  const std::size_t nx = f.resolution[0], ny = f.resolution[1];
  if (nx < 3 || ny < 3) throw Error(ErrorKind::InvalidArgument, "gradient_magnitude needs resolution >= 3");
  ScalarField g = f;
  g.failures.clear();
  const double dx = f.spacing(0), dy = f.spacing(1);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      double gx, gy;
      if (i == 0) gx = (f.at(1, j) - f.at(0, j)) / dx;
      else if (i + 1 == nx) gx = (f.at(i, j) - f.at(i - 1, j)) / dx;
      else gx = (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * dx);
      if (j == 0) gy = (f.at(i, 1) - f.at(i, 0)) / dy;
      else if (j + 1 == ny) gy = (f.at(i, j) - f.at(i, j - 1)) / dy;
      else gy = (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * dy);
      g.values[j * nx + i] = std::hypot(gx, gy);
    }
  return g;
}

struct StripStats {
  double max = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
  double peak_ratio() const { return max / mean; }
};

/// Max and mean over the nodes with |coordinate along `axis`| <= half_width.
inline StripStats strip_stats(const ScalarField& f, std::size_t axis, double half_width) {
  const double slack = 1e-9 * f.spacing(axis);
  StripStats s;
  double sum = 0.0;
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    const auto node = f.unravel(idx);
    if (std::abs(f.coordinate(axis, node[axis])) > half_width + slack) continue;
    const double v = f.values[idx];
    if (!std::isfinite(v)) continue;
    s.max = s.count == 0 ? v : std::max(s.max, v);
    sum += v;
    ++s.count;
  }
  if (s.count == 0) throw Error(ErrorKind::EmptyBand, "no grid nodes inside the strip");
  s.mean = sum / static_cast<double>(s.count);
  return s;
}

}  // namespace lagdesc
