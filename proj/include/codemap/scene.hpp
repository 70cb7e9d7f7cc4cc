#pragma once

// Composited map: landscape raster, contours, labels, markers, heat, metric
// overlays and flow-map arrows, plus the SVG renderer.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "codemap/analysis.hpp"
#include "codemap/geometry.hpp"
#include "codemap/image.hpp"
#include "codemap/terrain.hpp"

namespace codemap::scene {

// Bottom to top; a scene holds exactly one layer of each kind in this order.
enum class LayerKind { Landscape, Contours, Labels, Markers, Heat, Overlay, Arrows };

inline constexpr LayerKind kAllLayers[] = {LayerKind::Landscape, LayerKind::Contours,
                                           LayerKind::Labels,    LayerKind::Markers,
                                           LayerKind::Heat,      LayerKind::Overlay,
                                           LayerKind::Arrows};

std::string_view to_string(LayerKind kind);
std::optional<LayerKind> parse_layer(std::string_view name);

enum class LabelKind { Filename, Keyword };

struct Label {
  std::string text;
  Point anchor;  // world coordinates
  double font_size = 12.0;
  LabelKind kind = LabelKind::Filename;
};

// Axis-aligned label box in output pixels.
struct Box {
  double x0, y0, x1, y1;
  bool overlaps(const Box& o) const { return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1; }
};

Point to_pixels(Point world, double pixel_size);
Box label_box(const Label& label, double pixel_size);

struct LabelOptions {
  std::size_t max_labels = 64;
  double pixel_size = 1024.0;
  double min_font = 10.0;
  double max_font = 24.0;
  double keyword_font = 28.0;
  double keyword_threshold = 0.5;
};

// Keyword labels (hill tops) first, then filename labels largest-first; a
// label is dropped if its box overlaps one already placed.
std::vector<Label> place_labels(std::span<const Point> positions, const analysis::Corpus& corpus,
                                const terrain::ElevationGrid& grid,
                                const terrain::TerrainConfig& terrain_config,
                                const LabelOptions& options);

struct Visit {
  std::uint32_t doc;
  std::uint64_t sequence;
};

struct Heat {
  std::uint32_t doc;
  double value;  // 0.8^rank
  std::uint32_t rank;
};

// Most recent distinct document first.
std::vector<Heat> heat_layer(std::span<const Visit> visits);

struct FlowNode {
  Point at;
  std::optional<std::size_t> parent;  // empty for the source
  std::uint32_t leaves = 0;
  std::optional<std::size_t> target;  // index into the targets for leaves
};

struct FlowEdge {
  std::size_t from;
  std::size_t to;
  std::uint32_t thickness;
};

// Node 0 is the source; edges point away from it.
struct FlowTree {
  std::vector<FlowNode> nodes;
  std::vector<FlowEdge> edges;

  Point source() const { return nodes.front().at; }
  std::size_t leaf_count() const;
  double ink() const;  // total edge length
};

inline constexpr double kFlowNudge = 0.15;

// Agglomerative merge of the nearest cluster centroids; internal nodes are
// moved 15% toward the source. Throws InputError for an empty target list.
FlowTree flow_map(Point source, std::span<const Point> targets);

enum class Palette { Sequential, Diverging };

std::optional<Palette> parse_palette(std::string_view name);
image::Rgb palette_color(Palette palette, double t);

struct OverlayEntry {
  std::uint32_t doc;
  double value;
  double t;  // normalised to [0,1]
  std::string color;
  Point at;              // filled in by locate_overlay
  double radius = 0.0;   // world units
};

struct Overlay {
  std::string name;
  Palette palette = Palette::Sequential;
  std::vector<OverlayEntry> entries;  // sorted by doc
};

Overlay overlay_layer(const std::map<std::uint32_t, double>& values, Palette palette,
                      std::string name = "overlay");

void locate_overlay(Overlay& overlay, std::span<const Point> positions, std::span<const double> sizes,
                    const terrain::TerrainConfig& config);

struct Marker {
  std::uint32_t doc;
  Point at;
  std::string color;
  std::string text;  // optional pop-up caption
};

struct HeatSpot {
  std::uint32_t doc;
  Point at;
  double value;
  double radius;  // world units
};

struct Landscape {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> png;
};

struct Arrows {
  std::vector<FlowTree> trees;
};

using LayerPayload = std::variant<Landscape, std::vector<terrain::Polyline>, std::vector<Label>,
                                  std::vector<Marker>, std::vector<HeatSpot>, Overlay, Arrows>;

struct Layer {
  LayerKind kind;
  bool visible = true;
  LayerPayload payload;
};

struct MapScene {
  std::size_t size = 1024;  // output pixels (square)
  std::vector<Layer> layers;

  Layer& layer(LayerKind kind);
  const Layer& layer(LayerKind kind) const;
  void set_visible(std::span<const LayerKind> visible);
};

// Coloured, hill-shaded RGBA raster of the grid.
std::vector<std::uint8_t> landscape_rgba(const terrain::ElevationGrid& grid,
                                         std::span<const double> shade);

struct SceneInputs {
  std::span<const Point> positions;
  const analysis::Corpus* corpus = nullptr;
  const terrain::ElevationGrid* grid = nullptr;
  terrain::TerrainConfig terrain;
  std::size_t size = 1024;
  std::size_t max_labels = 64;
};

// Scene with every layer present; dynamic layers (markers, heat, overlay,
// arrows) start empty.
MapScene compose_scene(const SceneInputs& inputs);

std::vector<HeatSpot> heat_spots(std::span<const Heat> heat, std::span<const Point> positions,
                                 std::span<const double> sizes, const terrain::TerrainConfig& config);

std::string render_svg(const MapScene& scene);

}  // namespace codemap::scene
