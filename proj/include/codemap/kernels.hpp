#pragma once

// Data-parallel inner loops of the pipeline. The kernels in codemap::kernels
// are OpenMP versions split by output row; each row is accumulated in a fixed
// order, so results are bitwise identical for any thread count.
// codemap::kernels::reference holds straightforward serial implementations
// (Floyd-Warshall, dense dot products, splat-major accumulation) used as test
// oracles and benchmark baselines. They agree with the parallel kernels to
// rounding, not bit for bit.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "codemap/analysis.hpp"
#include "codemap/geometry.hpp"
#include "codemap/matrix.hpp"

namespace codemap::kernels {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct WeightedEdge {
  std::uint32_t to;
  double weight;
};
using WeightedAdjacency = std::vector<std::vector<WeightedEdge>>;
using Adjacency = std::vector<std::vector<std::uint32_t>>;

// Fixed points pulling on the free configuration during stress majorization.
struct AnchorField {
  std::span<const Point> positions;       // m anchor positions
  std::span<const double> weights;        // m weights, > 0
  std::span<const double> dissimilarity;  // n*m, row i = document i
};

struct StressProblem {
  const DenseMatrix* dissimilarity = nullptr;  // n x n
  std::span<const Point> positions;            // n
  AnchorField anchors;
};

// Isotropic Gaussian contribution to a height field.
struct Splat {
  Point center;
  double amplitude;
  double sigma;
  double cutoff;  // world-unit radius beyond which the kernel is skipped
};

// Node (c, r) of a grid sits at world (c * cell, 1 - r * cell).
struct GridShape {
  std::size_t width;
  std::size_t height;
  double cell;
};

struct LightVector {
  double x, y, z;
};

// 1 - cosine of L2-normalised sparse vectors; pairs with a zero vector are 1,
// the diagonal is 0.
DenseMatrix cosine_dissimilarity(std::span<const analysis::SparseVector> vectors);

// Unweighted shortest-path lengths; kUnreachable for disconnected pairs.
DenseMatrix hop_distances(const Adjacency& adjacency);

// Weighted all-pairs shortest paths, one Dijkstra run per source.
DenseMatrix geodesic_distances(const WeightedAdjacency& adjacency);

void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y);

// Raw stress of the configuration, document pairs plus anchor terms.
double stress(const StressProblem& problem);

// Per document i:
//   sum_j (d_ij / |z_i - z_j|) (z_i - z_j) + sum_a w_a (d_ia / |z_i - p_a|) (z_i - p_a)
// with coincident pairs contributing nothing.
void guttman_numerator(const StressProblem& problem, std::span<Point> out);

void gaussian_splat(std::span<const Splat> splats, GridShape shape, std::span<double> heights);

// Lambertian shade of central-difference normals, clamped at 0.
void hillshade(std::span<const double> heights, GridShape shape, LightVector light,
               double exaggeration, std::span<double> shade);

namespace reference {

DenseMatrix cosine_dissimilarity(std::span<const analysis::SparseVector> vectors);
DenseMatrix hop_distances(const Adjacency& adjacency);
DenseMatrix geodesic_distances(const WeightedAdjacency& adjacency);
void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y);
double stress(const StressProblem& problem);
void guttman_numerator(const StressProblem& problem, std::span<Point> out);
void gaussian_splat(std::span<const Splat> splats, GridShape shape, std::span<double> heights);
void hillshade(std::span<const double> heights, GridShape shape, LightVector light,
               double exaggeration, std::span<double> shade);

}  // namespace reference

}  // namespace codemap::kernels
