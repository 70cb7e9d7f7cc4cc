#include <doctest.h>

#include <cmath>
#include <random>

#include <omp.h>

#include "codemap/kernels.hpp"

using namespace codemap;
using namespace codemap::kernels;

namespace {

std::vector<analysis::SparseVector> random_vectors(std::size_t n, std::uint32_t columns, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.1, 1.0);
  std::vector<analysis::SparseVector> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 7 == 3) continue;  // some zero vectors
    double norm = 0.0;
    for (std::uint32_t c = 0; c < columns; ++c) {
      if (rng() % 3 != 0) continue;
      out[i].push_back({c, w(rng)});
      norm += out[i].back().weight * out[i].back().weight;
    }
    for (auto& e : out[i]) e.weight /= std::sqrt(norm);
  }
  return out;
}

Adjacency random_graph(std::size_t n, std::mt19937_64& rng) {
  Adjacency adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng() % 9 == 0) {
        adj[i].push_back(static_cast<std::uint32_t>(j));
        adj[j].push_back(static_cast<std::uint32_t>(i));
      }
    }
  }
  return adj;
}

WeightedAdjacency weighted(const Adjacency& adj, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.05, 1.0);
  WeightedAdjacency out(adj.size());
  for (std::size_t i = 0; i < adj.size(); ++i) {
    for (std::uint32_t j : adj[i]) {
      if (j < i) continue;
      const double weight = w(rng);
      out[i].push_back({j, weight});
      out[j].push_back({static_cast<std::uint32_t>(i), weight});
    }
  }
  return out;
}

void check_close(const DenseMatrix& a, const DenseMatrix& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (tol == 0.0 || std::isinf(a(i, j)) || std::isinf(b(i, j))) {
        CHECK(a(i, j) == b(i, j));
      } else {
        CHECK(a(i, j) == doctest::Approx(b(i, j)).epsilon(tol));
      }
    }
  }
}

struct StressFixture {
  DenseMatrix d;
  std::vector<Point> x;
  std::vector<Point> anchors;
  std::vector<double> weights;
  std::vector<double> anchor_d;

  StressProblem problem() const { return {&d, x, {anchors, weights, anchor_d}}; }
};

StressFixture random_stress(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  StressFixture f{DenseMatrix(n), {}, {}, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) f.d(i, j) = f.d(j, i) = u(rng);
    f.x.push_back({u(rng), u(rng)});
  }
  f.x[1] = f.x[0];  // a coincident pair contributes nothing to the numerator
  for (std::size_t a = 0; a < m; ++a) {
    f.anchors.push_back({u(rng), u(rng)});
    f.weights.push_back(0.5 + u(rng));
  }
  for (std::size_t k = 0; k < n * m; ++k) f.anchor_d.push_back(u(rng));
  return f;
}

}  // namespace

TEST_CASE("cosine dissimilarity matches the dense reference") {
  std::mt19937_64 rng(1);
  const auto v = random_vectors(40, 30, rng);
  const auto fast = cosine_dissimilarity(v);
  check_close(fast, reference::cosine_dissimilarity(v), 1e-12);
  CHECK(fast(3, 3) == 0.0);
  CHECK(fast(3, 5) == 1.0);
}

TEST_CASE("hop distances match Floyd-Warshall") {
  std::mt19937_64 rng(2);
  const auto adj = random_graph(35, rng);
  check_close(hop_distances(adj), reference::hop_distances(adj), 0.0);
}

TEST_CASE("geodesic distances match Floyd-Warshall") {
  std::mt19937_64 rng(3);
  const auto adj = weighted(random_graph(35, rng), rng);
  check_close(geodesic_distances(adj), reference::geodesic_distances(adj), 1e-12);
}

TEST_CASE("matvec matches the naive product") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix a(23);
  for (double& v : a.values()) v = u(rng);
  std::vector<double> x(23), fast(23), slow(23);
  for (double& v : x) v = u(rng);
  matvec(a, x, fast);
  reference::matvec(a, x, slow);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
}

TEST_CASE("stress and Guttman numerator match the references, with and without anchors") {
  std::mt19937_64 rng(5);
  for (std::size_t m : {0u, 3u}) {
    const auto f = random_stress(30, m, rng);
    CHECK(stress(f.problem()) == doctest::Approx(reference::stress(f.problem())).epsilon(1e-12));
    std::vector<Point> fast(30), slow(30);
    guttman_numerator(f.problem(), fast);
    reference::guttman_numerator(f.problem(), slow);
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i].x == doctest::Approx(slow[i].x).epsilon(1e-12));
      CHECK(fast[i].y == doctest::Approx(slow[i].y).epsilon(1e-12));
    }
  }
}

TEST_CASE("gaussian splat matches splat-major accumulation") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Splat> splats;
  for (int i = 0; i < 25; ++i) {
    const double sigma = 0.01 + 0.1 * u(rng);
    splats.push_back({{u(rng), u(rng)}, 0.1 + u(rng), sigma, 4.0 * sigma});
  }
  const GridShape shape{64, 64, 1.0 / 63.0};
  std::vector<double> fast(64 * 64), slow(64 * 64);
  gaussian_splat(splats, shape, fast);
  reference::gaussian_splat(splats, shape, slow);
  for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
}

TEST_CASE("hillshade matches the reference") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const GridShape shape{40, 30, 1.0 / 39.0};
  std::vector<double> h(40 * 30);
  for (double& v : h) v = u(rng);
  const LightVector light{-0.5, 0.5, std::sqrt(0.5)};
  std::vector<double> fast(h.size()), slow(h.size());
  hillshade(h, shape, light, 1.0, fast);
  reference::hillshade(h, shape, light, 1.0, slow);
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
}

TEST_CASE("parallel kernels are bitwise identical across thread counts") {
  std::mt19937_64 rng(8);
  const auto v = random_vectors(60, 40, rng);
  const auto adj = weighted(random_graph(60, rng), rng);
  const auto f = random_stress(60, 2, rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Splat> splats;
  for (int i = 0; i < 30; ++i) splats.push_back({{u(rng), u(rng)}, 1.0, 0.05, 0.2});
  const GridShape shape{96, 96, 1.0 / 95.0};

  auto run = [&](int threads) {
    omp_set_num_threads(threads);
    std::vector<Point> num(60);
    guttman_numerator(f.problem(), num);
    std::vector<double> h(96 * 96), shade(96 * 96);
    gaussian_splat(splats, shape, h);
    hillshade(h, shape, {-0.5, 0.5, std::sqrt(0.5)}, 1.0, shade);
    return std::make_tuple(cosine_dissimilarity(v), geodesic_distances(adj), stress(f.problem()), num, h, shade);
  };
  const auto one = run(1);
  const auto four = run(4);
  omp_set_num_threads(omp_get_num_procs());
  CHECK(std::get<0>(one) == std::get<0>(four));
  CHECK(std::get<1>(one) == std::get<1>(four));
  CHECK(std::get<2>(one) == std::get<2>(four));
  CHECK(std::get<3>(one) == std::get<3>(four));
  CHECK(std::get<4>(one) == std::get<4>(four));
  CHECK(std::get<5>(one) == std::get<5>(four));
}
