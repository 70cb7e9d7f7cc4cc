#include "codemap/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace codemap::kernels::reference {

DenseMatrix cosine_dissimilarity(std::span<const analysis::SparseVector> vectors) {
  const std::size_t n = vectors.size();
  std::uint32_t columns = 0;
  for (const auto& v : vectors) {
    for (const auto& e : v) columns = std::max(columns, e.column + 1);
  }
  std::vector<std::vector<double>> dense(n, std::vector<double>(columns, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& e : vectors[i]) dense[i][e.column] = e.weight;
  }
  DenseMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (vectors[i].empty() || vectors[j].empty()) {
        out(i, j) = 1.0;
        continue;
      }
      double dot = 0.0;
      for (std::uint32_t c = 0; c < columns; ++c) dot += dense[i][c] * dense[j][c];
      out(i, j) = std::clamp(1.0 - dot, 0.0, 1.0);
    }
  }
  return out;
}

namespace {

DenseMatrix floyd_warshall(DenseMatrix dist) {
  const std::size_t n = dist.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double via = dist(i, k) + dist(k, j);
        if (via < dist(i, j)) dist(i, j) = via;
      }
    }
  }
  return dist;
}

}  // namespace

DenseMatrix hop_distances(const Adjacency& adjacency) {
  const std::size_t n = adjacency.size();
  DenseMatrix dist(n, kUnreachable);
  for (std::size_t i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (std::uint32_t j : adjacency[i]) dist(i, j) = std::min(dist(i, j), 1.0);
  }
  return floyd_warshall(std::move(dist));
}

DenseMatrix geodesic_distances(const WeightedAdjacency& adjacency) {
  const std::size_t n = adjacency.size();
  DenseMatrix dist(n, kUnreachable);
  for (std::size_t i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (const WeightedEdge& e : adjacency[i]) dist(i, e.to) = std::min(dist(i, e.to), e.weight);
  }
  return floyd_warshall(std::move(dist));
}

void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += a(i, j) * x[j];
    y[i] = sum;
  }
}

double stress(const StressProblem& p) {
  const DenseMatrix& d = *p.dissimilarity;
  const std::size_t n = d.size();
  const std::size_t m = p.anchors.positions.size();
  double pairs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double r = d(i, j) - distance(p.positions[i], p.positions[j]);
      pairs += r * r;
    }
  }
  double anchored = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = p.anchors.dissimilarity[i * m + a] - distance(p.positions[i], p.anchors.positions[a]);
      anchored += p.anchors.weights[a] * r * r;
    }
  }
  return pairs + anchored;
}

void guttman_numerator(const StressProblem& p, std::span<Point> out) {
  const DenseMatrix& d = *p.dissimilarity;
  const std::size_t n = d.size();
  const std::size_t m = p.anchors.positions.size();
  std::fill(out.begin(), out.end(), Point{});
  // Pairwise contributions applied symmetrically, as in the textbook B(Z)Z.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double len = distance(p.positions[i], p.positions[j]);
      if (len == 0.0) continue;
      const double b = d(i, j) / len;
      const Point diff = p.positions[i] - p.positions[j];
      out[i] = out[i] + b * diff;
      out[j] = out[j] - b * diff;
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t i = 0; i < n; ++i) {
      const double len = distance(p.positions[i], p.anchors.positions[a]);
      if (len == 0.0) continue;
      const double b = p.anchors.weights[a] * p.anchors.dissimilarity[i * m + a] / len;
      out[i] = out[i] + b * (p.positions[i] - p.anchors.positions[a]);
    }
  }
}

void gaussian_splat(std::span<const Splat> splats, GridShape shape, std::span<double> heights) {
  std::fill(heights.begin(), heights.end(), 0.0);
  for (const Splat& s : splats) {
    for (std::size_t r = 0; r < shape.height; ++r) {
      for (std::size_t c = 0; c < shape.width; ++c) {
        const Point node{static_cast<double>(c) * shape.cell, 1.0 - static_cast<double>(r) * shape.cell};
        const double r2 = squared_distance(node, s.center);
        if (r2 <= s.cutoff * s.cutoff) {
          heights[r * shape.width + c] += s.amplitude * std::exp(-r2 / (2.0 * s.sigma * s.sigma));
        }
      }
    }
  }
}

void hillshade(std::span<const double> h, GridShape shape, LightVector light, double exaggeration,
               std::span<double> shade) {
  const std::size_t w = shape.width;
  const std::size_t ht = shape.height;
  for (std::size_t r = 0; r < ht; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t cl = c == 0 ? 0 : c - 1;
      const std::size_t cr = c + 1 == w ? c : c + 1;
      const std::size_t rn = r == 0 ? 0 : r - 1;
      const std::size_t rs = r + 1 == ht ? r : r + 1;
      const double zx = cr == cl ? 0.0 : (h[r * w + cr] - h[r * w + cl]) / (static_cast<double>(cr - cl) * shape.cell);
      const double zy = rs == rn ? 0.0 : (h[rn * w + c] - h[rs * w + c]) / (static_cast<double>(rs - rn) * shape.cell);
      const double n[3] = {-exaggeration * zx, -exaggeration * zy, 1.0};
      const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
      shade[r * w + c] = std::max(0.0, (n[0] * light.x + n[1] * light.y + n[2] * light.z) / len);
    }
  }
}

}  // namespace codemap::kernels::reference
