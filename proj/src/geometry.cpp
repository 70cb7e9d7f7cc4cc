#include "codemap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace codemap {

Point centroid(std::span<const Point> points) {
  if (points.empty()) return {};
  Point sum;
  for (const Point& p : points) sum = sum + p;
  return (1.0 / static_cast<double>(points.size())) * sum;
}

namespace {

struct Rigid {
  double angle;
  bool reflect;
  double residual;
};

Rigid best_rotation(std::span<const Point> a, std::span<const Point> b, bool reflect) {
  double c = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double bx = b[i].x;
    const double by = reflect ? -b[i].y : b[i].y;
    c += a[i].x * bx + a[i].y * by;
    s += a[i].y * bx - a[i].x * by;
  }
  const double angle = std::atan2(s, c);
  const double cs = std::cos(angle);
  const double sn = std::sin(angle);
  double residual = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double bx = b[i].x;
    const double by = reflect ? -b[i].y : b[i].y;
    residual += squared_distance(a[i], {cs * bx - sn * by, sn * bx + cs * by});
  }
  return {angle, reflect, residual};
}

}  // namespace

Alignment procrustes_align(std::span<const Point> target, std::span<const Point> moving) {
  Alignment out;
  const std::size_t n = std::min(target.size(), moving.size());
  if (n == 0) return out;
  const Point ca = centroid(target.first(n));
  const Point cb = centroid(moving.first(n));
  std::vector<Point> a(n);
  std::vector<Point> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = target[i] - ca;
    b[i] = moving[i] - cb;
  }
  const Rigid plain = best_rotation(a, b, false);
  const Rigid mirrored = best_rotation(a, b, true);
  const Rigid& best = mirrored.residual < plain.residual ? mirrored : plain;

  const double cs = std::cos(best.angle);
  const double sn = std::sin(best.angle);
  out.aligned.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double bx = b[i].x;
    const double by = best.reflect ? -b[i].y : b[i].y;
    out.aligned[i] = Point{cs * bx - sn * by, sn * bx + cs * by} + ca;
  }
  out.rotation = best.angle;
  out.reflected = best.reflect;
  out.rms = std::sqrt(best.residual / static_cast<double>(n));
  return out;
}

std::vector<Point> fit_unit_square(std::span<const Point> points) {
  std::vector<Point> out(points.begin(), points.end());
  if (out.empty()) return out;
  double minx = std::numeric_limits<double>::infinity();
  double miny = minx;
  double maxx = -minx;
  double maxy = -minx;
  for (const Point& p : points) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const double ex = maxx - minx;
  const double ey = maxy - miny;
  const double extent = std::max(ex, ey);
  if (!(extent > 0.0)) {
    std::fill(out.begin(), out.end(), Point{0.5, 0.5});
    return out;
  }
  const double ox = 0.5 * (1.0 - ex / extent);
  const double oy = 0.5 * (1.0 - ey / extent);
  for (Point& p : out) {
    p.x = std::clamp((p.x - minx) / extent + ox, 0.0, 1.0);
    p.y = std::clamp((p.y - miny) / extent + oy, 0.0, 1.0);
  }
  return out;
}

}  // namespace codemap
