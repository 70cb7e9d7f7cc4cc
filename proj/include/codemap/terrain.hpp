#pragma once

// Digital elevation model of a layout: summed Gaussian hills, hill-shading,
// contour lines and the water mask.

#include <cstddef>
#include <span>
#include <vector>

#include "codemap/geometry.hpp"

namespace codemap::terrain {

struct TerrainConfig {
  double sigma_scale = 0.05;   // world units per sqrt(size)
  double sigma_min = 0.01;
  double sigma_max = 0.2;
  double light_azimuth = 315.0;   // degrees clockwise from north
  double light_altitude = 45.0;   // degrees above the horizon
  unsigned contour_levels = 5;
  double water_level = 0.02;
  double exaggeration = 1.0;

  void validate() const;  // throws ConfigError
  std::vector<double> levels() const;  // evenly spaced in (water_level, 1)
};

// Height field over the unit square. Node (c, r) sits at world
// (c * cell, 1 - r * cell): row 0 is the northern edge.
struct ElevationGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  double cell = 0.0;
  double water_level = 0.02;
  std::vector<double> h;  // row-major, in [0,1]

  double at(std::size_t col, std::size_t row) const { return h[row * width + col]; }
  Point world(std::size_t col, std::size_t row) const;
  Point to_grid(Point world) const;  // fractional (col, row)
  std::size_t nearest_index(Point world) const;
};

double kernel_sigma(double size, const TerrainConfig& config);

// Radius (in sigmas) beyond which a kernel is skipped for `count` documents;
// keeps the normalised truncation error below 1e-4.
double truncation_radius(std::size_t count);

// Normalised sum of per-document Gaussians; an empty layout gives a zero grid.
ElevationGrid build_elevation(std::span<const Point> positions, std::span<const double> sizes,
                              const TerrainConfig& config, std::size_t resolution);

// Same sum before normalisation (used for the monotone-mass property).
std::vector<double> raw_elevation(std::span<const Point> positions, std::span<const double> sizes,
                                  const TerrainConfig& config, std::size_t resolution);

std::vector<double> hillshade(const ElevationGrid& grid, const TerrainConfig& config);

struct Polyline {
  double level = 0.0;
  std::vector<Point> points;  // world coordinates
  bool closed = false;        // closed loops repeat the first point at the end
};

// Marching squares with linear edge interpolation; saddles decided by the
// cell-centre average. Segments are chained into polylines that are either
// closed or end on the grid border.
std::vector<Polyline> contours(const ElevationGrid& grid, std::span<const double> levels);

std::vector<bool> shoreline(const ElevationGrid& grid);

}  // namespace codemap::terrain
