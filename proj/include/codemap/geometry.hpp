#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace codemap {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

Point centroid(std::span<const Point> points);

// Result of rigidly aligning one point set onto another.
struct Alignment {
  std::vector<Point> aligned;  // the moving set after the transform
  double rotation = 0.0;       // radians
  bool reflected = false;
  double rms = 0.0;            // root-mean-square residual
};

// Orthogonal Procrustes in the plane: translation, rotation and optional
// reflection (no scaling) mapping `moving` as close as possible to `target`.
Alignment procrustes_align(std::span<const Point> target, std::span<const Point> moving);

// Affine map into [0,1]^2 that keeps the aspect ratio; the shorter axis is
// centred. Degenerate (single point) sets land on (0.5, 0.5).
std::vector<Point> fit_unit_square(std::span<const Point> points);

}  // namespace codemap
