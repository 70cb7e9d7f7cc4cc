#include "codemap/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

#include "codemap/error.hpp"
#include "codemap/kernels.hpp"

namespace codemap::terrain {

namespace {

// Mass floor so empty files still raise a (tiny) hill.
constexpr double kMinMass = 1e-3;

kernels::GridShape shape_of(const ElevationGrid& grid) {
  return {grid.width, grid.height, grid.cell};
}

}  // namespace

void TerrainConfig::validate() const {
  if (!(sigma_scale > 0.0)) throw ConfigError("sigma scale must be positive");
  if (!(sigma_min > 0.0 && sigma_min <= sigma_max)) throw ConfigError("invalid sigma clamp range");
  if (!(light_altitude > 0.0 && light_altitude < 90.0)) {
    throw ConfigError("light altitude must lie strictly between 0 and 90 degrees");
  }
  if (!(water_level >= 0.0 && water_level < 1.0)) throw ConfigError("water level must lie in [0,1)");
  if (!(exaggeration > 0.0)) throw ConfigError("vertical exaggeration must be positive");
}

std::vector<double> TerrainConfig::levels() const {
  std::vector<double> out;
  for (unsigned k = 1; k <= contour_levels; ++k) {
    out.push_back(water_level + (1.0 - water_level) * static_cast<double>(k) /
                                    static_cast<double>(contour_levels + 1));
  }
  return out;
}

Point ElevationGrid::world(std::size_t col, std::size_t row) const {
  return {static_cast<double>(col) * cell, 1.0 - static_cast<double>(row) * cell};
}

Point ElevationGrid::to_grid(Point p) const { return {p.x / cell, (1.0 - p.y) / cell}; }

std::size_t ElevationGrid::nearest_index(Point p) const {
  const Point g = to_grid(p);
  const auto col = static_cast<std::size_t>(std::clamp(std::lround(g.x), 0L, static_cast<long>(width) - 1));
  const auto row = static_cast<std::size_t>(std::clamp(std::lround(g.y), 0L, static_cast<long>(height) - 1));
  return row * width + col;
}

double kernel_sigma(double size, const TerrainConfig& config) {
  return std::clamp(config.sigma_scale * std::sqrt(std::max(size, kMinMass)), config.sigma_min,
                    config.sigma_max);
}

double truncation_radius(std::size_t count) {
  const double n = static_cast<double>(std::max<std::size_t>(count, 1));
  return std::max(4.0, std::sqrt(2.0 * std::log(1e4 * n)));
}

std::vector<double> raw_elevation(std::span<const Point> positions, std::span<const double> sizes,
                                  const TerrainConfig& config, std::size_t resolution) {
  config.validate();
  if (resolution < 16) throw ConfigError("grid resolution must be at least 16");
  if (positions.size() != sizes.size()) throw InputError("positions and sizes differ in length");
  const double radius = truncation_radius(positions.size());
  std::vector<kernels::Splat> splats;
  splats.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Point p = positions[i];
    if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
      throw InputError("position " + std::to_string(i) + " lies outside the unit square");
    }
    if (!(sizes[i] >= 0.0) || !std::isfinite(sizes[i])) {
      throw InputError("size " + std::to_string(i) + " must be finite and non-negative");
    }
    const double sigma = kernel_sigma(sizes[i], config);
    splats.push_back({p, std::max(sizes[i], kMinMass), sigma, radius * sigma});
  }
  const kernels::GridShape shape{resolution, resolution, 1.0 / static_cast<double>(resolution - 1)};
  std::vector<double> heights(resolution * resolution, 0.0);
  kernels::gaussian_splat(splats, shape, heights);
  return heights;
}

ElevationGrid build_elevation(std::span<const Point> positions, std::span<const double> sizes,
                              const TerrainConfig& config, std::size_t resolution) {
  ElevationGrid grid;
  grid.h = raw_elevation(positions, sizes, config, resolution);
  grid.width = resolution;
  grid.height = resolution;
  grid.cell = 1.0 / static_cast<double>(resolution - 1);
  grid.water_level = config.water_level;
  const double peak = grid.h.empty() ? 0.0 : *std::max_element(grid.h.begin(), grid.h.end());
  if (peak > 0.0) {
    for (double& v : grid.h) v /= peak;
  }
  return grid;
}

std::vector<double> hillshade(const ElevationGrid& grid, const TerrainConfig& config) {
  config.validate();
  const double az = config.light_azimuth * std::numbers::pi / 180.0;
  const double alt = config.light_altitude * std::numbers::pi / 180.0;
  const kernels::LightVector light{std::cos(alt) * std::sin(az), std::cos(alt) * std::cos(az),
                                   std::sin(alt)};
  std::vector<double> shade(grid.h.size(), 0.0);
  kernels::hillshade(grid.h, shape_of(grid), light, config.exaggeration, shade);
  return shade;
}

namespace {

enum Side : int { Top = 0, Right = 1, Bottom = 2, Left = 3 };

struct Segment {
  std::uint64_t a;
  std::uint64_t b;
};

class ContourTracer {
public:
  ContourTracer(const ElevationGrid& grid, double level) : grid_(grid), level_(level) {}

  std::vector<Polyline> trace() {
    collect_segments();
    return chain();
  }

private:
  // Horizontal edge (c,r)-(c+1,r) and vertical edge (c,r)-(c,r+1).
  std::uint64_t horizontal(std::size_t c, std::size_t r) const { return (r * grid_.width + c) * 2; }
  std::uint64_t vertical(std::size_t c, std::size_t r) const { return (r * grid_.width + c) * 2 + 1; }

  std::uint64_t edge_key(std::size_t c, std::size_t r, Side side) {
    std::uint64_t key = 0;
    double a = 0.0;
    double b = 0.0;
    Point pa;
    Point pb;
    switch (side) {
      case Top:
        key = horizontal(c, r);
        a = grid_.at(c, r), b = grid_.at(c + 1, r);
        pa = grid_.world(c, r), pb = grid_.world(c + 1, r);
        break;
      case Bottom:
        key = horizontal(c, r + 1);
        a = grid_.at(c, r + 1), b = grid_.at(c + 1, r + 1);
        pa = grid_.world(c, r + 1), pb = grid_.world(c + 1, r + 1);
        break;
      case Left:
        key = vertical(c, r);
        a = grid_.at(c, r), b = grid_.at(c, r + 1);
        pa = grid_.world(c, r), pb = grid_.world(c, r + 1);
        break;
      case Right:
        key = vertical(c + 1, r);
        a = grid_.at(c + 1, r), b = grid_.at(c + 1, r + 1);
        pa = grid_.world(c + 1, r), pb = grid_.world(c + 1, r + 1);
        break;
    }
    if (!points_.contains(key)) {
      const double t = std::clamp((level_ - a) / (b - a), 0.0, 1.0);
      points_.emplace(key, pa + t * (pb - pa));
    }
    return key;
  }

  void add(std::size_t c, std::size_t r, Side s1, Side s2) {
    const auto a = edge_key(c, r, s1);
    const auto b = edge_key(c, r, s2);
    const auto index = segments_.size();
    segments_.push_back({a, b});
    incident_[a].push_back(index);
    incident_[b].push_back(index);
  }

  void collect_segments() {
    for (std::size_t r = 0; r + 1 < grid_.height; ++r) {
      for (std::size_t c = 0; c + 1 < grid_.width; ++c) {
        const double tl = grid_.at(c, r);
        const double tr = grid_.at(c + 1, r);
        const double br = grid_.at(c + 1, r + 1);
        const double bl = grid_.at(c, r + 1);
        const int index = (tl >= level_ ? 8 : 0) | (tr >= level_ ? 4 : 0) |
                          (br >= level_ ? 2 : 0) | (bl >= level_ ? 1 : 0);
        const bool centre_inside = 0.25 * (tl + tr + br + bl) >= level_;
        switch (index) {
          case 0:
          case 15: break;
          case 1: add(c, r, Left, Bottom); break;
          case 2: add(c, r, Bottom, Right); break;
          case 3: add(c, r, Left, Right); break;
          case 4: add(c, r, Top, Right); break;
          case 5:
            if (centre_inside) {
              add(c, r, Left, Top);
              add(c, r, Bottom, Right);
            } else {
              add(c, r, Left, Bottom);
              add(c, r, Top, Right);
            }
            break;
          case 6: add(c, r, Top, Bottom); break;
          case 7: add(c, r, Left, Top); break;
          case 8: add(c, r, Left, Top); break;
          case 9: add(c, r, Top, Bottom); break;
          case 10:
            if (centre_inside) {
              add(c, r, Top, Right);
              add(c, r, Left, Bottom);
            } else {
              add(c, r, Left, Top);
              add(c, r, Bottom, Right);
            }
            break;
          case 11: add(c, r, Top, Right); break;
          case 12: add(c, r, Left, Right); break;
          case 13: add(c, r, Bottom, Right); break;
          case 14: add(c, r, Left, Bottom); break;
          default: break;
        }
      }
    }
  }

  Polyline walk(std::size_t first_segment, std::uint64_t start_key) {
    Polyline line;
    line.level = level_;
    line.points.push_back(points_.at(start_key));
    std::uint64_t key = start_key;
    std::size_t seg = first_segment;
    while (true) {
      used_[seg] = true;
      const Segment& s = segments_[seg];
      key = s.a == key ? s.b : s.a;
      line.points.push_back(points_.at(key));
      if (key == start_key) {
        line.closed = true;
        break;
      }
      const auto& next = incident_.at(key);
      auto it = std::find_if(next.begin(), next.end(), [&](std::size_t k) { return !used_[k]; });
      if (it == next.end()) break;
      seg = *it;
    }
    return line;
  }

  std::vector<Polyline> chain() {
    std::vector<Polyline> out;
    used_.assign(segments_.size(), false);
    std::vector<std::uint64_t> open_ends;
    for (const auto& [key, list] : incident_) {
      if (list.size() == 1) open_ends.push_back(key);
    }
    std::sort(open_ends.begin(), open_ends.end());
    for (std::uint64_t key : open_ends) {
      const std::size_t seg = incident_.at(key).front();
      if (!used_[seg]) out.push_back(walk(seg, key));
    }
    for (std::size_t seg = 0; seg < segments_.size(); ++seg) {
      if (!used_[seg]) out.push_back(walk(seg, segments_[seg].a));
    }
    return out;
  }

  const ElevationGrid& grid_;
  double level_;
  std::vector<Segment> segments_;
  std::vector<bool> used_;
  std::unordered_map<std::uint64_t, Point> points_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> incident_;
};

}  // namespace

std::vector<Polyline> contours(const ElevationGrid& grid, std::span<const double> levels) {
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i] > levels[i - 1])) throw ConfigError("contour levels must be strictly increasing");
  }
  std::vector<Polyline> out;
  for (double level : levels) {
    auto lines = ContourTracer(grid, level).trace();
    std::move(lines.begin(), lines.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<bool> shoreline(const ElevationGrid& grid) {
  std::vector<bool> mask(grid.h.size());
  for (std::size_t i = 0; i < grid.h.size(); ++i) mask[i] = grid.h[i] < grid.water_level;
  return mask;
}

}  // namespace codemap::terrain
