#include "codemap/layout.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string_view>

#include "codemap/error.hpp"
#include "codemap/kernels.hpp"

namespace codemap::layout {

DissimilarityMatrix::DissimilarityMatrix(DenseMatrix values) : values_(std::move(values)) {
  const std::size_t n = values_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (values_(i, i) != 0.0) throw InputError("dissimilarity diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = values_(i, j);
      if (std::isnan(v)) {
        throw InputError("dissimilarity (" + std::to_string(i) + ", " + std::to_string(j) + ") is NaN");
      }
      if (v < 0.0 || v > 1.0) throw InputError("dissimilarity outside [0,1]");
      if (v != values_(j, i)) throw InputError("dissimilarity matrix is not symmetric");
    }
  }
}

void LayoutConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
  if (knn < 1) throw ConfigError("knn must be at least 1");
  if (!(eps >= 0.0)) throw ConfigError("eps must be non-negative");
  if (!(anchor_weight > 0.0)) throw ConfigError("anchor weight must be positive");
}

DissimilarityMatrix lexical_dissimilarity(const analysis::Corpus& corpus) {
  return DissimilarityMatrix(kernels::cosine_dissimilarity(corpus.term_vectors));
}

DissimilarityMatrix structural_dissimilarity(const analysis::DependencyGraph& graph) {
  DenseMatrix hops = kernels::hop_distances(graph.undirected_adjacency());
  for (double& v : hops.values()) {
    v = v == kernels::kUnreachable ? 1.0 : 1.0 - 1.0 / (1.0 + v);
  }
  return DissimilarityMatrix(std::move(hops));
}

DissimilarityMatrix combine(const DissimilarityMatrix& lexical, const DissimilarityMatrix& structural,
                            double alpha) {
  if (lexical.size() != structural.size()) {
    throw InputError("cannot combine dissimilarities of size " + std::to_string(lexical.size()) +
                     " and " + std::to_string(structural.size()));
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
  const std::size_t n = lexical.size();
  DenseMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out(i, j) = std::clamp(alpha * lexical(i, j) + (1.0 - alpha) * structural(i, j), 0.0, 1.0);
    }
  }
  return DissimilarityMatrix(std::move(out));
}

namespace {

constexpr double kPowerTolerance = 1e-10;
constexpr int kPowerMaxIter = 1000;

struct Eigenpair {
  double value = 0.0;
  std::vector<double> vector;
};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(std::vector<double>& v) {
  const double len = std::sqrt(dot(v, v));
  if (len > 0.0) {
    for (double& x : v) x /= len;
  }
}

// Dominant eigenpair of (a + shift I) by power iteration; the returned value
// has the shift removed.
Eigenpair power_iteration(const DenseMatrix& a, double shift, std::vector<double> v) {
  const std::size_t n = a.size();
  std::vector<double> y(n);
  normalize(v);
  for (int iter = 0; iter < kPowerMaxIter; ++iter) {
    kernels::matvec(a, v, y);
    for (std::size_t i = 0; i < n; ++i) y[i] += shift * v[i];
    const double len = std::sqrt(dot(y, y));
    if (len == 0.0) return {-shift, v};
    // A negative dominant eigenvalue flips the iterate each step.
    const double sign = dot(y, v) < 0.0 ? -1.0 : 1.0;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = sign * y[i] / len;
      change += (next - v[i]) * (next - v[i]);
      v[i] = next;
    }
    if (std::sqrt(change) < kPowerTolerance) break;
  }
  kernels::matvec(a, v, y);
  return {dot(v, y), v};
}

// Largest algebraic eigenpair: run plain power iteration, and if the dominant
// eigenvalue is negative, rerun on the shifted (positive semidefinite) matrix.
Eigenpair top_eigenpair(const DenseMatrix& a, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> start(a.size());
  for (double& x : start) x = unit(rng);
  Eigenpair first = power_iteration(a, 0.0, start);
  if (first.value >= 0.0) return first;
  const double shift = -first.value;
  return power_iteration(a, shift, start);
}

}  // namespace

std::vector<Point> classical_mds(const DenseMatrix& distances, std::uint64_t seed) {
  const std::size_t n = distances.size();
  if (n == 0) return {};
  if (n == 1) return {Point{}};

  // B = -1/2 J D^2 J via row and grand means of the squared distances.
  DenseMatrix b(n);
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double sq = distances(i, j) * distances(i, j);
      b(i, j) = sq;
      row_mean[i] += sq;
    }
    grand += row_mean[i];
    row_mean[i] /= static_cast<double>(n);
  }
  grand /= static_cast<double>(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      b(i, j) = -0.5 * (b(i, j) - row_mean[i] - row_mean[j] + grand);
    }
  }

  std::mt19937_64 rng(seed);
  Eigenpair e1 = top_eigenpair(b, rng);
  DenseMatrix deflated = b;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) deflated(i, j) -= e1.value * e1.vector[i] * e1.vector[j];
  }
  Eigenpair e2 = top_eigenpair(deflated, rng);

  // Rayleigh-Ritz on span{v1, v2}: resolves any mixing left by power
  // iteration when the two leading eigenvalues are close.
  std::vector<double>& v1 = e1.vector;
  std::vector<double>& v2 = e2.vector;
  const double overlap = dot(v1, v2);
  for (std::size_t i = 0; i < n; ++i) v2[i] -= overlap * v1[i];
  const double v2_len = std::sqrt(dot(v2, v2));
  double lambda1 = e1.value;
  double lambda2 = e2.value;
  if (v2_len > 1e-12) {
    for (double& x : v2) x /= v2_len;
    std::vector<double> bv1(n), bv2(n);
    kernels::matvec(b, v1, bv1);
    kernels::matvec(b, v2, bv2);
    const double t11 = dot(v1, bv1);
    const double t12 = 0.5 * (dot(v1, bv2) + dot(v2, bv1));
    const double t22 = dot(v2, bv2);
    const double mean = 0.5 * (t11 + t22);
    const double radius = std::hypot(0.5 * (t11 - t22), t12);
    lambda1 = mean + radius;
    lambda2 = mean - radius;
    const double theta = 0.5 * std::atan2(2.0 * t12, t11 - t22);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = v1[i];
      const double bb = v2[i];
      v1[i] = c * a + s * bb;
      v2[i] = -s * a + c * bb;
    }
  } else {
    lambda2 = 0.0;
  }
  const double s1 = std::sqrt(std::max(0.0, lambda1));
  const double s2 = std::sqrt(std::max(0.0, lambda2));
  std::vector<Point> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {v1[i] * s1, v2[i] * s2};
  return out;
}

std::vector<std::vector<std::pair<std::uint32_t, double>>> neighborhood_graph(
    const DissimilarityMatrix& d, unsigned knn) {
  const std::size_t n = d.size();
  std::vector<std::set<std::uint32_t>> linked(n);
  const std::size_t k = std::min<std::size_t>(knn, n == 0 ? 0 : n - 1);
  std::vector<std::uint32_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::uint32_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        return d(i, a) != d(i, b) ? d(i, a) < d(i, b) : a < b;
                      });
    for (std::size_t r = 0; r < k; ++r) {
      linked[i].insert(order[r]);
      linked[order[r]].insert(static_cast<std::uint32_t>(i));
    }
  }

  // Bridge components with the globally cheapest cross pairs (Kruskal order).
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j : linked[i]) {
      const auto ri = find(i);
      const auto rj = find(j);
      if (ri != rj) {
        parent[ri] = rj;
        --components;
      }
    }
  }
  if (components > 1) {
    struct Candidate {
      double cost;
      std::uint32_t i, j;
    };
    std::vector<Candidate> candidates;
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = i + 1; j < n; ++j) {
        if (find(i) != find(j)) candidates.push_back({d(i, j), i, j});
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.cost != b.cost) return a.cost < b.cost;
      if (a.i != b.i) return a.i < b.i;
      return a.j < b.j;
    });
    for (const Candidate& c : candidates) {
      const auto ri = find(c.i);
      const auto rj = find(c.j);
      if (ri == rj) continue;
      parent[ri] = rj;
      linked[c.i].insert(c.j);
      linked[c.j].insert(c.i);
      if (--components == 1) break;
    }
  }

  std::vector<std::vector<std::pair<std::uint32_t, double>>> graph(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j : linked[i]) graph[i].emplace_back(j, d(i, j));
  }
  return graph;
}

std::vector<Point> isomap_init(const DissimilarityMatrix& d, const LayoutConfig& config) {
  const std::size_t n = d.size();
  if (n == 0) return {};
  if (n == 1) return {Point{0.5, 0.5}};
  const auto graph = neighborhood_graph(d, config.knn);
  kernels::WeightedAdjacency adjacency(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : graph[i]) adjacency[i].push_back({j, w});
  }
  DenseMatrix geodesic = kernels::geodesic_distances(adjacency);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = std::min(geodesic(i, j), geodesic(j, i));
      geodesic(i, j) = g;
      geodesic(j, i) = g;
    }
  }
  return classical_mds(geodesic, config.seed);
}

namespace {

bool is_prefix_key(std::string_view key, std::string_view path) {
  return path.size() > key.size() && path.starts_with(key) &&
         (key.ends_with('/') || path[key.size()] == '/');
}

AnchorTargets resolve_impl(std::span<const AnchorSpec> specs, double weight,
                           std::span<const std::string> paths, const DissimilarityMatrix& d,
                           const analysis::Corpus* corpus, double alpha) {
  if (!(weight > 0.0)) throw ConfigError("anchor weight must be positive");
  const std::size_t n = paths.size();
  if (d.size() != n) throw InputError("anchor resolution: dissimilarity size mismatch");
  AnchorTargets out;
  out.weight = weight;
  out.pinned.assign(n, std::nullopt);

  std::vector<std::vector<double>> columns;
  for (const AnchorSpec& spec : specs) {
    if (!(spec.position.x >= 0.0 && spec.position.x <= 1.0 && spec.position.y >= 0.0 &&
          spec.position.y <= 1.0)) {
      throw ConfigError("anchor '" + spec.key + "' lies outside the unit square");
    }
    ResolvedAnchor resolved{spec, AnchorKind::External, {}};
    const auto exact = std::find(paths.begin(), paths.end(), spec.key);
    if (exact != paths.end()) {
      const auto id = static_cast<std::uint32_t>(exact - paths.begin());
      if (out.pinned[id]) throw ConfigError("document '" + spec.key + "' anchored twice");
      resolved.kind = AnchorKind::Document;
      resolved.members = {id};
      out.pinned[id] = spec.position;
      out.resolved.push_back(std::move(resolved));
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (is_prefix_key(spec.key, paths[i])) resolved.members.push_back(static_cast<std::uint32_t>(i));
    }
    std::vector<double> column(n, 1.0);
    if (!resolved.members.empty()) {
      resolved.kind = AnchorKind::Prefix;
      // Members sit on the anchor; everyone else is as far from it as from
      // the closest member.
      for (std::size_t i = 0; i < n; ++i) {
        double best = 1.0;
        for (std::uint32_t m : resolved.members) best = std::min(best, d(i, m));
        column[i] = best;
      }
      for (std::uint32_t m : resolved.members) column[m] = 0.0;
    } else if (corpus != nullptr && !spec.terms.empty()) {
      analysis::SparseVector v;
      for (const std::string& term : spec.terms) {
        const auto it = corpus->vocabulary.find(term);
        if (it == corpus->vocabulary.end()) continue;
        const double w = corpus->idf[it->second] > 0.0 ? corpus->idf[it->second] : 1.0;
        v.push_back({it->second, w});
      }
      std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.column < b.column; });
      v.erase(std::unique(v.begin(), v.end(),
                          [](const auto& a, const auto& b) { return a.column == b.column; }),
              v.end());
      double norm = 0.0;
      for (const auto& e : v) norm += e.weight * e.weight;
      norm = std::sqrt(norm);
      for (auto& e : v) e.weight /= norm;
      for (std::size_t i = 0; i < n; ++i) {
        double cosine = 0.0;
        if (!v.empty()) {
          for (const auto& e : corpus->term_vectors[i]) {
            const auto hit = std::lower_bound(v.begin(), v.end(), e.column,
                                              [](const auto& x, std::uint32_t c) { return x.column < c; });
            if (hit != v.end() && hit->column == e.column) cosine += hit->weight * e.weight;
          }
        }
        // External nodes have no edges, so the structural part is always 1.
        column[i] = std::clamp(alpha * (1.0 - cosine) + (1.0 - alpha), 0.0, 1.0);
      }
    }
    columns.push_back(std::move(column));
    out.positions.push_back(spec.position);
    out.weights.push_back(weight);
    out.resolved.push_back(std::move(resolved));
  }
  const std::size_t m = columns.size();
  out.dissimilarity.assign(n * m, 1.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t i = 0; i < n; ++i) out.dissimilarity[i * m + a] = columns[a][i];
  }
  return out;
}

void check_finite(std::span<const Point> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
      throw InputError("initial position of document " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace

AnchorTargets resolve_anchors(std::span<const AnchorSpec> specs, double weight,
                              const analysis::Corpus& corpus, const DissimilarityMatrix& d,
                              double alpha) {
  std::vector<std::string> paths;
  paths.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) paths.push_back(doc.path);
  return resolve_impl(specs, weight, paths, d, &corpus, alpha);
}

AnchorTargets resolve_anchors(std::span<const AnchorSpec> specs, double weight,
                              std::span<const std::string> paths, const DissimilarityMatrix& d) {
  return resolve_impl(specs, weight, paths, d, nullptr, 1.0);
}

Layout smacof_refine(const DissimilarityMatrix& d, std::span<const Point> init,
                     const AnchorTargets& anchors, const LayoutConfig& config) {
  config.validate();
  const std::size_t n = d.size();
  if (init.size() != n) {
    throw InputError("initial configuration has " + std::to_string(init.size()) +
                     " points for " + std::to_string(n) + " documents");
  }
  check_finite(init);
  const bool has_anchors = anchors.any();
  if (has_anchors && anchors.pinned.size() != n) throw InputError("anchor targets do not match layout size");

  Layout out;
  out.seed = config.seed;
  out.anchors = anchors.resolved;
  out.anchor_weight = anchors.weight;
  if (n == 0) {
    out.converged = true;
    return out;
  }

  std::vector<Point> x(init.begin(), init.end());
  std::vector<bool> fixed(n, false);
  std::size_t pinned_count = 0;
  Point pinned_sum;
  if (has_anchors) {
    for (std::size_t i = 0; i < n; ++i) {
      if (anchors.pinned[i]) {
        x[i] = *anchors.pinned[i];
        fixed[i] = true;
        ++pinned_count;
        pinned_sum = pinned_sum + x[i];
      }
    }
  }
  const std::size_t free_count = n - pinned_count;
  const std::size_t m = anchors.pseudo_count();
  double anchor_weight_sum = 0.0;
  Point anchor_pull;
  for (std::size_t a = 0; a < m; ++a) {
    anchor_weight_sum += anchors.weights[a];
    anchor_pull = anchor_pull + anchors.weights[a] * anchors.positions[a];
  }
  const bool frame_fixed = pinned_count > 0 || m > 0;

  // Separate exactly coincident free points so the Guttman transform sees a
  // direction between them.
  {
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> jitter(-1e-6, 1e-6);
    std::map<std::pair<double, double>, std::size_t> seen;
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) continue;
      if (!seen.emplace(std::make_pair(x[i].x, x[i].y), i).second) {
        x[i].x += jitter(rng);
        x[i].y += jitter(rng);
      }
    }
  }

  kernels::StressProblem problem;
  problem.dissimilarity = &d.matrix();
  problem.anchors = {anchors.positions, anchors.weights, anchors.dissimilarity};

  double weighted_d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) weighted_d2 += d(i, j) * d(i, j);
    for (std::size_t a = 0; a < m; ++a) {
      const double v = anchors.dissimilarity[i * m + a];
      weighted_d2 += anchors.weights[a] * v * v;
    }
  }

  if (!frame_fixed) {
    // Optimal uniform scale of the start: makes warm starts from a rescaled
    // layout equivalent to the layout they came from.
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double len = distance(x[i], x[j]);
        num += d(i, j) * len;
        den += len * len;
      }
    }
    if (den > 0.0 && num > 0.0) {
      const double scale = num / den;
      for (Point& p : x) p = scale * p;
    }
  }

  problem.positions = x;
  double sigma = kernels::stress(problem);
  out.stress_history.push_back(sigma);

  std::vector<Point> numerator(n);
  std::vector<Point> next(n);
  std::vector<Point> relaxed(n);
  const double c = static_cast<double>(n) + anchor_weight_sum;
  for (unsigned iter = 0; iter < config.max_iter; ++iter) {
    if (sigma == 0.0) {
      out.converged = true;
      break;
    }
    problem.positions = x;
    kernels::guttman_numerator(problem, numerator);
    if (!frame_fixed) {
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) next[i] = inv_n * numerator[i];
    } else {
      // Solve V_ff x = rhs with V_ff = c I - 1 1^T restricted to free points.
      Point rhs_sum;
      for (std::size_t i = 0; i < n; ++i) {
        if (fixed[i]) continue;
        numerator[i] = numerator[i] + pinned_sum + anchor_pull;
        rhs_sum = rhs_sum + numerator[i];
      }
      const double denom = c - static_cast<double>(free_count);
      const Point shared = (1.0 / denom) * rhs_sum;
      for (std::size_t i = 0; i < n; ++i) {
        next[i] = fixed[i] ? x[i] : (1.0 / c) * (numerator[i] + shared);
      }
    }
    problem.positions = next;
    double trial = kernels::stress(problem);
    // Over-relaxed step 2 G(X) - X, kept only when it beats the plain update.
    for (std::size_t i = 0; i < n; ++i) relaxed[i] = fixed[i] ? x[i] : 2.0 * next[i] - x[i];
    problem.positions = relaxed;
    const double relaxed_stress = kernels::stress(problem);
    if (relaxed_stress < trial) {
      next.swap(relaxed);
      trial = relaxed_stress;
    }
    out.stress_history.push_back(trial);
    assert(trial <= sigma + 1e-9 * std::max(1.0, sigma));
    if ((sigma - trial) / sigma < config.eps) {
      out.converged = true;
      break;
    }
    x.swap(next);
    sigma = trial;
    ++out.iterations;
  }

  out.raw_stress = sigma;
  out.stress = weighted_d2 > 0.0 ? sigma / weighted_d2 : 0.0;
  if (!has_anchors) {
    out.positions = fit_unit_square(x);
  } else {
    out.positions = std::move(x);
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) continue;
      out.positions[i].x = std::clamp(out.positions[i].x, 0.0, 1.0);
      out.positions[i].y = std::clamp(out.positions[i].y, 0.0, 1.0);
    }
  }
  return out;
}

Layout layout_fresh(const DissimilarityMatrix& d, std::span<const std::string> paths,
                    const AnchorTargets& anchors, const LayoutConfig& config) {
  config.validate();
  if (paths.size() != d.size()) throw InputError("path list does not match dissimilarity size");
  Layout out = smacof_refine(d, fit_unit_square(isomap_init(d, config)), anchors, config);
  // Second start from classical MDS of d itself; the lower stress wins.
  Layout direct = smacof_refine(d, fit_unit_square(classical_mds(d.matrix(), config.seed)), anchors, config);
  if (direct.raw_stress < out.raw_stress) out = std::move(direct);
  out.paths.assign(paths.begin(), paths.end());
  return out;
}

std::vector<Point> warm_start(const DissimilarityMatrix& d, std::span<const std::string> paths,
                              const Layout& previous, unsigned knn) {
  const std::size_t n = d.size();
  if (paths.size() != n) throw InputError("path list does not match dissimilarity size");
  std::map<std::string_view, Point> before;
  for (std::size_t i = 0; i < previous.paths.size() && i < previous.positions.size(); ++i) {
    before.emplace(previous.paths[i], previous.positions[i]);
  }
  std::vector<Point> init(n);
  std::vector<std::uint32_t> survivors;
  std::vector<bool> survived(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (auto it = before.find(paths[i]); it != before.end()) {
      init[i] = it->second;
      survived[i] = true;
      survivors.push_back(static_cast<std::uint32_t>(i));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (survived[i]) continue;
    if (survivors.empty()) {
      init[i] = {0.5, 0.5};
      continue;
    }
    std::vector<std::uint32_t> order = survivors;
    const std::size_t k = std::min<std::size_t>(knn, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        return d(i, a) != d(i, b) ? d(i, a) < d(i, b) : a < b;
                      });
    Point sum;
    for (std::size_t r = 0; r < k; ++r) sum = sum + init[order[r]];
    init[i] = (1.0 / static_cast<double>(k)) * sum;
  }
  return init;
}

Layout layout_incremental(const DissimilarityMatrix& d, std::span<const std::string> paths,
                          const Layout& previous, const AnchorTargets& anchors,
                          const LayoutConfig& config) {
  config.validate();
  const std::vector<Point> init = warm_start(d, paths, previous, config.knn);
  Layout out = smacof_refine(d, init, anchors, config);
  out.paths.assign(paths.begin(), paths.end());
  return out;
}

}  // namespace codemap::layout
