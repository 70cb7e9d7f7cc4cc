#pragma once

// Two-dimensional embedding of a corpus: combined lexical/structural
// dissimilarity, Isomap initialisation and SMACOF stress majorization with
// optional fixed anchors.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codemap/analysis.hpp"
#include "codemap/geometry.hpp"
#include "codemap/matrix.hpp"

namespace codemap::layout {

// Symmetric, zero diagonal, entries in [0,1].
class DissimilarityMatrix {
public:
  DissimilarityMatrix() = default;
  // Validates the invariants; throws InputError on violation.
  explicit DissimilarityMatrix(DenseMatrix values);

  std::size_t size() const { return values_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }
  const DenseMatrix& matrix() const { return values_; }

private:
  DenseMatrix values_;
};

struct LayoutConfig {
  double alpha = 0.5;          // weight of the lexical term
  unsigned knn = 7;            // Isomap neighbourhood size
  unsigned max_iter = 300;     // SMACOF iteration cap
  double eps = 1e-6;           // relative stress tolerance
  std::uint64_t seed = 0;
  double anchor_weight = 2.0;  // w_a for every anchor

  void validate() const;  // throws ConfigError
};

// One user-declared anchor. `key` is a document path, a directory prefix or
// the name of something outside the corpus (an external library, say).
struct AnchorSpec {
  std::string key;
  Point position;
  std::vector<std::string> terms;  // optional vocabulary for external anchors

  friend bool operator==(const AnchorSpec&, const AnchorSpec&) = default;
};

enum class AnchorKind { Document, Prefix, External };

struct ResolvedAnchor {
  AnchorSpec spec;
  AnchorKind kind = AnchorKind::External;
  std::vector<std::uint32_t> members;  // documents the anchor stands for
};

// Everything smacof_refine needs to know about anchors, already in terms of
// document ids.
struct AnchorTargets {
  std::vector<ResolvedAnchor> resolved;
  double weight = 2.0;
  std::vector<std::optional<Point>> pinned;  // per document; Document anchors
  std::vector<Point> positions;              // pseudo-node positions
  std::vector<double> weights;               // per pseudo-node
  std::vector<double> dissimilarity;         // n * pseudo-node count

  std::size_t pseudo_count() const { return positions.size(); }
  bool any() const { return !resolved.empty(); }
};

struct Layout {
  std::vector<std::string> paths;  // aligned with positions
  std::vector<Point> positions;    // in [0,1]^2
  std::vector<ResolvedAnchor> anchors;
  double anchor_weight = 2.0;
  double stress = 0.0;             // normalised: raw stress / weighted sum of d^2
  double raw_stress = 0.0;
  unsigned iterations = 0;         // accepted Guttman steps
  bool converged = false;
  std::uint64_t seed = 0;
  std::vector<double> stress_history;  // raw stress of every evaluated configuration
};

DissimilarityMatrix lexical_dissimilarity(const analysis::Corpus& corpus);

// 1 - 1/(1 + hops) over the undirected dependency graph; 1 when unreachable.
DissimilarityMatrix structural_dissimilarity(const analysis::DependencyGraph& graph);

DissimilarityMatrix combine(const DissimilarityMatrix& lexical,
                            const DissimilarityMatrix& structural, double alpha);

// Classical (Torgerson) MDS to two dimensions; eigenpairs by power iteration
// with deflation, negative eigenvalues clamped to zero.
std::vector<Point> classical_mds(const DenseMatrix& distances, std::uint64_t seed);

// Symmetric k-NN graph over `d`, components bridged by their cheapest
// connecting pairs, then classical MDS of the graph geodesics.
std::vector<Point> isomap_init(const DissimilarityMatrix& d, const LayoutConfig& config);

// Weighted k-NN graph used by isomap_init (exposed for tests).
std::vector<std::vector<std::pair<std::uint32_t, double>>> neighborhood_graph(
    const DissimilarityMatrix& d, unsigned knn);

AnchorTargets resolve_anchors(std::span<const AnchorSpec> specs, double weight,
                              const analysis::Corpus& corpus, const DissimilarityMatrix& d,
                              double alpha);

// Anchors that only need document paths (no term vectors); External anchors
// with terms fall back to dissimilarity 1.
AnchorTargets resolve_anchors(std::span<const AnchorSpec> specs, double weight,
                              std::span<const std::string> paths, const DissimilarityMatrix& d);

Layout smacof_refine(const DissimilarityMatrix& d, std::span<const Point> init,
                     const AnchorTargets& anchors, const LayoutConfig& config);

Layout layout_fresh(const DissimilarityMatrix& d, std::span<const std::string> paths,
                    const AnchorTargets& anchors, const LayoutConfig& config);

// Warm start: survivors keep their previous position, new documents start at
// the centroid of their nearest surviving neighbours.
std::vector<Point> warm_start(const DissimilarityMatrix& d, std::span<const std::string> paths,
                              const Layout& previous, unsigned knn);

Layout layout_incremental(const DissimilarityMatrix& d, std::span<const std::string> paths,
                          const Layout& previous, const AnchorTargets& anchors,
                          const LayoutConfig& config);

}  // namespace codemap::layout
