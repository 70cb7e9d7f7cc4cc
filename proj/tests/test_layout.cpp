#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <deque>
#include <random>

#include "codemap/error.hpp"
#include "codemap/layout.hpp"

using namespace codemap;
using namespace codemap::layout;

namespace {

DissimilarityMatrix from_points(const std::vector<Point>& p) {
  DenseMatrix m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) m(i, j) = distance(p[i], p[j]);
  }
  return DissimilarityMatrix(std::move(m));
}

DissimilarityMatrix random_dissimilarity(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DenseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = m(j, i) = u(rng);
  }
  return DissimilarityMatrix(std::move(m));
}

std::vector<Point> random_points(std::size_t n, double extent, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, extent);
  std::vector<Point> out(n);
  for (Point& p : out) p = {u(rng), u(rng)};
  return out;
}

// Two-dimensional classical MDS with a full symmetric eigendecomposition.
std::vector<Point> eigen_mds(const DenseMatrix& d) {
  const auto n = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd sq(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = d(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      sq(i, j) = v * v;
    }
  }
  const Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd b = -0.5 * j * sq * j;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  std::vector<Point> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = {vectors(i, n - 1) * std::sqrt(std::max(0.0, values(n - 1))),
                                        vectors(i, n - 2) * std::sqrt(std::max(0.0, values(n - 2)))};
  }
  return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

AnchorTargets no_anchors(std::size_t n) {
  AnchorTargets t;
  t.pinned.assign(n, std::nullopt);
  return t;
}

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("f" + std::to_string(100 + i));
  return out;
}

}  // namespace

TEST_CASE("lexical dissimilarity") {
  analysis::Corpus c;
  const double r = 1.0 / std::sqrt(2.0);
  c.term_vectors = {{{0, 1.0}}, {{0, 1.0}}, {{1, 1.0}}, {{0, r}, {1, r}}};
  c.documents.resize(4);
  const auto d = lexical_dissimilarity(c);
  CHECK(d(0, 1) == 0.0);
  CHECK(d(0, 2) == 1.0);
  // brute-force dot product of {a:1} and {a:1/sqrt2, b:1/sqrt2}
  const double dot = 1.0 * r + 0.0 * r;
  CHECK(d(0, 3) == doctest::Approx(1.0 - dot));
  CHECK(d(0, 3) == doctest::Approx(0.2929).epsilon(1e-4));
}

TEST_CASE("structural dissimilarity") {
  analysis::DependencyGraph g;
  g.n = 4;
  g.edges = {{0, 1, analysis::EdgeKind::Import}, {1, 2, analysis::EdgeKind::NameReference}};
  const auto d = structural_dissimilarity(g);
  CHECK(d(0, 1) == 0.5);
  CHECK(d(1, 0) == 0.5);
  CHECK(d(0, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(d(0, 3) == 1.0);
  CHECK(d(3, 3) == 0.0);
}

TEST_CASE("combined dissimilarity") {
  DenseMatrix a(2), b(2);
  a(0, 1) = a(1, 0) = 0.2;
  b(0, 1) = b(1, 0) = 0.6;
  const DissimilarityMatrix lex(a), str(b);
  CHECK(combine(lex, str, 1.0)(0, 1) == 0.2);
  CHECK(combine(lex, str, 0.0)(0, 1) == 0.6);
  CHECK(combine(lex, str, 0.5)(0, 1) == doctest::Approx(0.4));
  CHECK_THROWS_AS(combine(lex, str, 1.5), ConfigError);
}

TEST_CASE("dissimilarity invariants are enforced") {
  DenseMatrix m(2);
  m(0, 1) = std::nan("");
  m(1, 0) = 0.5;
  CHECK_THROWS_AS(DissimilarityMatrix{m}, InputError);
  m(0, 1) = 0.4;
  CHECK_THROWS_AS(DissimilarityMatrix{m}, InputError);
  m(0, 1) = m(1, 0) = 1.5;
  CHECK_THROWS_AS(DissimilarityMatrix{m}, InputError);
}

TEST_CASE("classical MDS of an equilateral triangle") {
  DenseMatrix d(3, 1.0);
  for (std::size_t i = 0; i < 3; ++i) d(i, i) = 0.0;
  const auto p = classical_mds(d, 1);
  CHECK(distance(p[0], p[1]) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(distance(p[1], p[2]) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(distance(p[0], p[2]) == doctest::Approx(1.0).epsilon(1e-6));

  LayoutConfig config;
  config.knn = 2;
  const auto q = isomap_init(DissimilarityMatrix(d), config);
  CHECK(distance(q[0], q[1]) == doctest::Approx(distance(q[1], q[2])).epsilon(1e-6));
}

TEST_CASE("classical MDS of collinear points is rank one") {
  std::vector<Point> line;
  for (double t : {0.0, 0.1, 0.25, 0.3, 0.55, 0.9}) line.push_back({t, 0.0});
  const auto p = classical_mds(from_points(line).matrix(), 3);
  double sx = 0.0, sy = 0.0;
  for (const Point& q : p) {
    sx += q.x * q.x;
    sy += q.y * q.y;
  }
  CHECK(std::sqrt(sy / sx) < 1e-6);
}

TEST_CASE("classical MDS agrees with a dense eigensolver") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = random_points(4 + trial % 16, 1.0, rng);
    DenseMatrix d(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j < pts.size(); ++j) d(i, j) = distance(pts[i], pts[j]);
    }
    const auto ours = classical_mds(d, static_cast<std::uint64_t>(trial));
    const auto oracle = eigen_mds(d);
    const auto aligned = procrustes_align(oracle, ours);
    CHECK(aligned.rms < 1e-8);
  }
}

TEST_CASE("neighbourhood graph is symmetric and connected") {
  std::mt19937_64 rng(12);
  // Two far-apart clusters: k-NN alone leaves them disconnected.
  std::vector<Point> pts = random_points(6, 0.05, rng);
  for (const Point& p : random_points(6, 0.05, rng)) pts.push_back({p.x + 0.9, p.y + 0.9});
  DenseMatrix m(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) m(i, j) = std::min(distance(pts[i], pts[j]), 1.0);
  }
  const auto g = neighborhood_graph(DissimilarityMatrix(m), 2);
  std::vector<bool> seen(g.size(), false);
  std::deque<std::uint32_t> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (const auto& [v, w] : g[u]) {
      bool back = false;
      for (const auto& [x, w2] : g[v]) back = back || x == u;
      CHECK(back);
      if (!seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  CHECK(std::count(seen.begin(), seen.end(), true) == 12);
}

TEST_CASE("Isomap recovers a 5x5 lattice from Euclidean distances") {
  std::vector<Point> pts;
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) pts.push_back({c * 0.15, r * 0.15});
  }
  const auto d = from_points(pts);
  LayoutConfig config;
  const auto y = isomap_init(d, config);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      a.push_back(d(i, j));
      b.push_back(distance(y[i], y[j]));
    }
  }
  CHECK(pearson(a, b) >= 0.99);
}

TEST_CASE("SMACOF stress never increases") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial);
    const auto d = random_dissimilarity(n, rng);
    const auto init = random_points(n, 1.0, rng);
    const auto out = smacof_refine(d, init, no_anchors(n), LayoutConfig{});
    for (std::size_t k = 1; k < out.stress_history.size(); ++k) {
      CHECK(out.stress_history[k] <= out.stress_history[k - 1] + 1e-9);
    }
    for (const Point& p : out.positions) {
      CHECK(p.x >= 0.0);
      CHECK(p.x <= 1.0);
      CHECK(p.y >= 0.0);
      CHECK(p.y <= 1.0);
    }
  }
}

TEST_CASE("SMACOF leaves a perfect embedding where it is") {
  std::mt19937_64 rng(14);
  const auto pts = random_points(12, 0.7, rng);
  const auto out = smacof_refine(from_points(pts), pts, no_anchors(12), LayoutConfig{});
  CHECK(out.stress < 1e-20);
  const auto expected = fit_unit_square(pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(out.positions[i].x == doctest::Approx(expected[i].x).epsilon(1e-9));
    CHECK(out.positions[i].y == doctest::Approx(expected[i].y).epsilon(1e-9));
  }
}

TEST_CASE("SMACOF rejects bad input") {
  DenseMatrix m(2);
  m(0, 1) = m(1, 0) = 0.5;
  const DissimilarityMatrix d(m);
  std::vector<Point> init{{0, 0}, {std::nan(""), 0}};
  CHECK_THROWS_AS(smacof_refine(d, init, no_anchors(2), LayoutConfig{}), InputError);
  init.pop_back();
  CHECK_THROWS_AS(smacof_refine(d, init, no_anchors(2), LayoutConfig{}), InputError);
  LayoutConfig bad;
  bad.alpha = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("document anchors never move") {
  std::mt19937_64 rng(15);
  const auto d = random_dissimilarity(15, rng);
  const auto paths = names(15);
  const std::vector<AnchorSpec> specs{{paths[4], {0.1, 0.9}, {}}};
  const auto targets = resolve_anchors(specs, 2.0, paths, d);
  REQUIRE(targets.resolved.size() == 1);
  CHECK(targets.resolved[0].kind == AnchorKind::Document);
  const auto out = layout_fresh(d, paths, targets, LayoutConfig{});
  CHECK(out.positions[4].x == 0.1);
  CHECK(out.positions[4].y == 0.9);
  CHECK(out.anchors.size() == 1);
}

TEST_CASE("anchor resolution") {
  std::mt19937_64 rng(16);
  const std::vector<std::string> paths{"db/a.x", "db/b.x", "dbx/c.x", "ui/d.x"};
  const auto d = random_dissimilarity(4, rng);
  SUBCASE("directory prefix") {
    const std::vector<AnchorSpec> specs{{"db", {0.5, 0.05}, {}}};
    const auto t = resolve_anchors(specs, 2.0, paths, d);
    CHECK(t.resolved[0].kind == AnchorKind::Prefix);
    CHECK(t.resolved[0].members == std::vector<std::uint32_t>{0, 1});
    REQUIRE(t.pseudo_count() == 1);
    CHECK(t.dissimilarity[0] == 0.0);
    CHECK(t.dissimilarity[2] == std::min(d(2, 0), d(2, 1)));
  }
  SUBCASE("external name without terms") {
    const std::vector<AnchorSpec> specs{{"libfoo", {1.0, 1.0}, {}}};
    const auto t = resolve_anchors(specs, 2.0, paths, d);
    CHECK(t.resolved[0].kind == AnchorKind::External);
    for (double v : t.dissimilarity) CHECK(v == 1.0);
  }
  SUBCASE("errors") {
    const std::vector<AnchorSpec> outside{{"db", {1.5, 0.0}, {}}};
    CHECK_THROWS_AS(resolve_anchors(outside, 2.0, paths, d), ConfigError);
    const std::vector<AnchorSpec> twice{{"ui/d.x", {0.0, 0.0}, {}}, {"ui/d.x", {1.0, 0.0}, {}}};
    CHECK_THROWS_AS(resolve_anchors(twice, 2.0, paths, d), ConfigError);
    CHECK_THROWS_AS(resolve_anchors({}, 0.0, paths, d), ConfigError);
  }
}

TEST_CASE("external anchors use term vocabulary") {
  analysis::Corpus c;
  c.documents.resize(2);
  c.documents[0].path = "a.x";
  c.documents[1].path = "b.x";
  c.vocabulary = {{"query", 0}, {"window", 1}};
  c.terms = {"query", "window"};
  c.idf = {std::log(2.0), std::log(2.0)};
  c.term_vectors = {{{0, 1.0}}, {{1, 1.0}}};
  const auto d = lexical_dissimilarity(c);
  const std::vector<AnchorSpec> specs{{"postgres", {0.5, 0.0}, {"query"}}};
  const auto t = resolve_anchors(specs, 2.0, c, d, 1.0);
  CHECK(t.dissimilarity[0] == doctest::Approx(0.0));
  CHECK(t.dissimilarity[1] == doctest::Approx(1.0));
}

TEST_CASE("warm start places a new file at its neighbours' centroid") {
  DenseMatrix m(4, 0.9);
  for (std::size_t i = 0; i < 4; ++i) m(i, i) = 0.0;
  const DissimilarityMatrix d(m);
  Layout prev;
  prev.paths = {"a", "b", "c"};
  prev.positions = {{0, 0}, {0, 1}, {1, 0}};
  const std::vector<std::string> paths{"a", "b", "c", "new"};
  const auto init = warm_start(d, paths, prev, 3);
  CHECK(init[0] == Point{0, 0});
  CHECK(init[3].x == doctest::Approx(1.0 / 3.0));
  CHECK(init[3].y == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("incremental layout of an unchanged corpus is a fixed point") {
  std::mt19937_64 rng(17);
  const auto d = random_dissimilarity(20, rng);
  const auto paths = names(20);
  const auto first = layout_fresh(d, paths, no_anchors(20), LayoutConfig{});
  const auto second = layout_incremental(d, paths, first, no_anchors(20), LayoutConfig{});
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(std::abs(first.positions[i].x - second.positions[i].x) <= 1e-9);
    CHECK(std::abs(first.positions[i].y - second.positions[i].y) <= 1e-9);
  }
}

TEST_CASE("layout is deterministic for a seed") {
  std::mt19937_64 rng(18);
  const auto d = random_dissimilarity(25, rng);
  const auto paths = names(25);
  LayoutConfig config;
  config.seed = 42;
  const auto a = layout_fresh(d, paths, no_anchors(25), config);
  const auto b = layout_fresh(d, paths, no_anchors(25), config);
  CHECK(a.positions == b.positions);
  CHECK(a.stress_history == b.stress_history);
}

TEST_CASE("degenerate sizes") {
  const DissimilarityMatrix empty{DenseMatrix(0)};
  CHECK(layout_fresh(empty, {}, no_anchors(0), LayoutConfig{}).positions.empty());
  const DissimilarityMatrix one{DenseMatrix(1)};
  const std::vector<std::string> path{"only"};
  const auto out = layout_fresh(one, path, no_anchors(1), LayoutConfig{});
  REQUIRE(out.positions.size() == 1);
  CHECK(out.positions[0] == Point{0.5, 0.5});
}
