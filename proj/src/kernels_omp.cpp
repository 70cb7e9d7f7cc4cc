#include "codemap/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <utility>

#include <omp.h>

namespace codemap::kernels {
namespace {

using analysis::SparseVector;

double sparse_dot(const SparseVector& a, const SparseVector& b) {
  double sum = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->column < ib->column) {
      ++ia;
    } else if (ib->column < ia->column) {
      ++ib;
    } else {
      sum += ia->weight * ib->weight;
      ++ia;
      ++ib;
    }
  }
  return sum;
}

void hop_row(const Adjacency& adjacency, std::uint32_t source, std::span<double> row) {
  std::fill(row.begin(), row.end(), kUnreachable);
  std::vector<std::uint32_t> frontier{source};
  row[source] = 0.0;
  double depth = 0.0;
  while (!frontier.empty()) {
    depth += 1.0;
    std::vector<std::uint32_t> next;
    for (std::uint32_t u : frontier) {
      for (std::uint32_t v : adjacency[u]) {
        if (row[v] == kUnreachable) {
          row[v] = depth;
          next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
  }
}

void dijkstra_row(const WeightedAdjacency& adjacency, std::uint32_t source,
                  std::span<double> row) {
  std::fill(row.begin(), row.end(), kUnreachable);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  row[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [dist, u] = queue.top();
    queue.pop();
    if (dist > row[u]) continue;
    for (const WeightedEdge& e : adjacency[u]) {
      const double candidate = dist + e.weight;
      if (candidate < row[e.to]) {
        row[e.to] = candidate;
        queue.emplace(candidate, e.to);
      }
    }
  }
}

double stress_row(const StressProblem& p, std::size_t i) {
  const DenseMatrix& d = *p.dissimilarity;
  const std::size_t n = d.size();
  const std::size_t m = p.anchors.positions.size();
  double sum = 0.0;
  for (std::size_t j = i + 1; j < n; ++j) {
    const double r = d(i, j) - distance(p.positions[i], p.positions[j]);
    sum += r * r;
  }
  for (std::size_t a = 0; a < m; ++a) {
    const double r = p.anchors.dissimilarity[i * m + a] -
                     distance(p.positions[i], p.anchors.positions[a]);
    sum += p.anchors.weights[a] * r * r;
  }
  return sum;
}

Point guttman_row(const StressProblem& p, std::size_t i) {
  const DenseMatrix& d = *p.dissimilarity;
  const std::size_t n = d.size();
  const std::size_t m = p.anchors.positions.size();
  const Point zi = p.positions[i];
  Point acc;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const Point diff = zi - p.positions[j];
    const double len = std::hypot(diff.x, diff.y);
    if (len > 0.0) acc = acc + (d(i, j) / len) * diff;
  }
  for (std::size_t a = 0; a < m; ++a) {
    const Point diff = zi - p.anchors.positions[a];
    const double len = std::hypot(diff.x, diff.y);
    if (len > 0.0) {
      acc = acc + (p.anchors.weights[a] * p.anchors.dissimilarity[i * m + a] / len) * diff;
    }
  }
  return acc;
}

void splat_row(std::span<const Splat> splats, GridShape shape, std::size_t r,
               std::span<double> row) {
  const double y = 1.0 - static_cast<double>(r) * shape.cell;
  std::fill(row.begin(), row.end(), 0.0);
  const auto last = static_cast<long>(shape.width) - 1;
  for (const Splat& s : splats) {
    const double dy = y - s.center.y;
    if (std::abs(dy) > s.cutoff) continue;
    const long lo = std::max(0L, static_cast<long>(std::floor((s.center.x - s.cutoff) / shape.cell)) - 1);
    const long hi = std::min(last, static_cast<long>(std::ceil((s.center.x + s.cutoff) / shape.cell)) + 1);
    const double cutoff2 = s.cutoff * s.cutoff;
    const double inv = 1.0 / (2.0 * s.sigma * s.sigma);
    for (long c = lo; c <= hi; ++c) {
      const double dx = static_cast<double>(c) * shape.cell - s.center.x;
      const double r2 = dx * dx + dy * dy;
      if (r2 <= cutoff2) row[static_cast<std::size_t>(c)] += s.amplitude * std::exp(-r2 * inv);
    }
  }
}

void hillshade_row(std::span<const double> h, GridShape shape, LightVector light,
                   double exaggeration, std::size_t r, std::span<double> row) {
  const std::size_t w = shape.width;
  const std::size_t ht = shape.height;
  auto at = [&](std::size_t rr, std::size_t cc) { return h[rr * w + cc]; };
  for (std::size_t c = 0; c < w; ++c) {
    double zx = 0.0;
    if (w > 1) {
      if (c == 0) {
        zx = (at(r, 1) - at(r, 0)) / shape.cell;
      } else if (c == w - 1) {
        zx = (at(r, c) - at(r, c - 1)) / shape.cell;
      } else {
        zx = (at(r, c + 1) - at(r, c - 1)) / (2.0 * shape.cell);
      }
    }
    // Rows run north to south, so +y is the row above.
    double zy = 0.0;
    if (ht > 1) {
      if (r == 0) {
        zy = (at(0, c) - at(1, c)) / shape.cell;
      } else if (r == ht - 1) {
        zy = (at(r - 1, c) - at(r, c)) / shape.cell;
      } else {
        zy = (at(r - 1, c) - at(r + 1, c)) / (2.0 * shape.cell);
      }
    }
    const double nx = -exaggeration * zx;
    const double ny = -exaggeration * zy;
    const double norm = std::sqrt(nx * nx + ny * ny + 1.0);
    const double lambert = (nx * light.x + ny * light.y + light.z) / norm;
    row[c] = std::max(0.0, lambert);
  }
}

}  // namespace

DenseMatrix cosine_dissimilarity(std::span<const analysis::SparseVector> vectors) {
  const std::size_t n = vectors.size();
  DenseMatrix out(n);
  const auto rows = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (long ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        out(i, j) = 0.0;
      } else if (vectors[i].empty() || vectors[j].empty()) {
        out(i, j) = 1.0;
      } else {
        // Evaluate the dot in a canonical operand order so (i,j) and (j,i) match.
        const double dot = i < j ? sparse_dot(vectors[i], vectors[j]) : sparse_dot(vectors[j], vectors[i]);
        out(i, j) = std::clamp(1.0 - dot, 0.0, 1.0);
      }
    }
  }
  return out;
}

DenseMatrix hop_distances(const Adjacency& adjacency) {
  const std::size_t n = adjacency.size();
  DenseMatrix out(n);
  const auto rows = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (long s = 0; s < rows; ++s) {
    hop_row(adjacency, static_cast<std::uint32_t>(s), out.row(static_cast<std::size_t>(s)));
  }
  return out;
}

DenseMatrix geodesic_distances(const WeightedAdjacency& adjacency) {
  const std::size_t n = adjacency.size();
  DenseMatrix out(n);
  const auto rows = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (long s = 0; s < rows; ++s) {
    dijkstra_row(adjacency, static_cast<std::uint32_t>(s), out.row(static_cast<std::size_t>(s)));
  }
  return out;
}

void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y) {
  const auto rows = static_cast<long>(a.size());
#pragma omp parallel for schedule(static)
  for (long ii = 0; ii < rows; ++ii) {
    const auto row = a.row(static_cast<std::size_t>(ii));
    double sum = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) sum += row[j] * x[j];
    y[static_cast<std::size_t>(ii)] = sum;
  }
}

double stress(const StressProblem& problem) {
  const std::size_t n = problem.positions.size();
  std::vector<double> partial(n, 0.0);
  const auto rows = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < rows; ++i) {
    partial[static_cast<std::size_t>(i)] = stress_row(problem, static_cast<std::size_t>(i));
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

void guttman_numerator(const StressProblem& problem, std::span<Point> out) {
  const auto rows = static_cast<long>(problem.positions.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < rows; ++i) {
    out[static_cast<std::size_t>(i)] = guttman_row(problem, static_cast<std::size_t>(i));
  }
}

void gaussian_splat(std::span<const Splat> splats, GridShape shape, std::span<double> heights) {
  const auto rows = static_cast<long>(shape.height);
#pragma omp parallel for schedule(dynamic, 4)
  for (long r = 0; r < rows; ++r) {
    const auto rr = static_cast<std::size_t>(r);
    splat_row(splats, shape, rr, heights.subspan(rr * shape.width, shape.width));
  }
}

void hillshade(std::span<const double> heights, GridShape shape, LightVector light,
               double exaggeration, std::span<double> shade) {
  const auto rows = static_cast<long>(shape.height);
#pragma omp parallel for schedule(static)
  for (long r = 0; r < rows; ++r) {
    const auto rr = static_cast<std::size_t>(r);
    hillshade_row(heights, shape, light, exaggeration, rr, shade.subspan(rr * shape.width, shape.width));
  }
}

}  // namespace codemap::kernels
