#include "codemap/scene.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "codemap/error.hpp"

namespace codemap::scene {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Landscape: return "landscape";
    case LayerKind::Contours: return "contours";
    case LayerKind::Labels: return "labels";
    case LayerKind::Markers: return "markers";
    case LayerKind::Heat: return "heat";
    case LayerKind::Overlay: return "overlay";
    case LayerKind::Arrows: return "arrows";
  }
  return "landscape";
}

std::optional<LayerKind> parse_layer(std::string_view name) {
  for (LayerKind kind : kAllLayers) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

Point to_pixels(Point world, double pixel_size) {
  return {world.x * pixel_size, (1.0 - world.y) * pixel_size};
}

Box label_box(const Label& label, double pixel_size) {
  const Point p = to_pixels(label.anchor, pixel_size);
  const double half_w = 0.5 * 0.6 * label.font_size * static_cast<double>(label.text.size());
  const double half_h = 0.5 * label.font_size;
  return {p.x - half_w, p.y - half_h, p.x + half_w, p.y + half_h};
}

namespace {

std::string filename_text(const std::string& path) {
  const auto slash = path.rfind('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = base.rfind('.');
  if (dot != std::string::npos && dot > 0) base.resize(dot);
  return base;
}

// Grid nodes above `threshold` that are the maximum of their 8-neighbourhood;
// plateaus keep only their first node in row-major order.
std::vector<std::size_t> local_maxima(const terrain::ElevationGrid& grid, double threshold) {
  std::vector<std::size_t> out;
  const auto w = static_cast<long>(grid.width);
  const auto h = static_cast<long>(grid.height);
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r * w + c);
      const double v = grid.h[idx];
      if (!(v > threshold)) continue;
      bool is_max = true;
      for (long dr = -1; dr <= 1 && is_max; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const long rr = r + dr;
          const long cc = c + dc;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          const std::size_t other = static_cast<std::size_t>(rr * w + cc);
          const double u = grid.h[other];
          if (u > v || (u == v && other < idx)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) out.push_back(idx);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [&](std::size_t a, std::size_t b) { return grid.h[a] > grid.h[b]; });
  return out;
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

}  // namespace

std::vector<Label> place_labels(std::span<const Point> positions, const analysis::Corpus& corpus,
                                const terrain::ElevationGrid& grid,
                                const terrain::TerrainConfig& terrain_config,
                                const LabelOptions& options) {
  std::vector<Label> placed;
  std::vector<Box> boxes;
  if (options.max_labels == 0 || positions.empty()) return placed;
  const std::size_t n = positions.size();
  if (corpus.documents.size() != n) throw InputError("label placement: corpus/layout size mismatch");

  auto try_place = [&](Label label) {
    if (placed.size() >= options.max_labels) return;
    const Box box = label_box(label, options.pixel_size);
    for (const Box& b : boxes) {
      if (b.overlaps(box)) return;
    }
    boxes.push_back(box);
    placed.push_back(std::move(label));
  };

  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) sigma[i] = terrain::kernel_sigma(corpus.documents[i].size, terrain_config);

  // Keyword labels sit one font height above their hill top.
  for (std::size_t idx : local_maxima(grid, options.keyword_threshold)) {
    const Point peak = grid.world(idx % grid.width, idx / grid.width);
    std::map<std::uint32_t, double> weight;
    for (std::size_t i = 0; i < n; ++i) {
      if (distance(positions[i], peak) > 2.0 * sigma[i]) continue;
      for (const auto& e : corpus.term_vectors[i]) weight[e.column] += e.weight;
    }
    std::optional<std::uint32_t> best;
    for (const auto& [column, w] : weight) {
      if (w <= 0.0) continue;
      if (!best || w > weight[*best] ||
          (w == weight[*best] && corpus.terms[column] < corpus.terms[*best])) {
        best = column;
      }
    }
    if (!best) continue;
    Label label{upper(corpus.terms[*best]),
                {peak.x, peak.y + options.keyword_font / options.pixel_size},
                options.keyword_font,
                LabelKind::Keyword};
    try_place(std::move(label));
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& doc : corpus.documents) {
    lo = std::min(lo, std::sqrt(doc.size));
    hi = std::max(hi, std::sqrt(doc.size));
  }
  std::vector<std::uint32_t> order(n);
  for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return corpus.documents[a].size > corpus.documents[b].size;
  });
  for (std::uint32_t i : order) {
    const double t = hi > lo ? (std::sqrt(corpus.documents[i].size) - lo) / (hi - lo) : 0.5;
    const double font = std::clamp(options.min_font + t * (options.max_font - options.min_font), 8.0, 32.0);
    try_place(Label{filename_text(corpus.documents[i].path), positions[i], font, LabelKind::Filename});
  }
  return placed;
}

std::vector<Heat> heat_layer(std::span<const Visit> visits) {
  std::vector<Visit> ordered(visits.begin(), visits.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Visit& a, const Visit& b) { return a.sequence < b.sequence; });
  std::vector<Heat> out;
  std::set<std::uint32_t> seen;
  for (auto it = ordered.rbegin(); it != ordered.rend(); ++it) {
    if (!seen.insert(it->doc).second) continue;
    const auto rank = static_cast<std::uint32_t>(out.size());
    out.push_back({it->doc, std::pow(0.8, static_cast<double>(rank)), rank});
  }
  return out;
}

std::size_t FlowTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(),
                                                [](const FlowNode& n) { return n.target.has_value(); }));
}

double FlowTree::ink() const {
  double total = 0.0;
  for (const FlowEdge& e : edges) total += distance(nodes[e.from].at, nodes[e.to].at);
  return total;
}

FlowTree flow_map(Point source, std::span<const Point> targets) {
  if (targets.empty()) throw InputError("flow map needs at least one target");
  FlowTree tree;
  tree.nodes.push_back({source, std::nullopt, 0, std::nullopt});

  struct Cluster {
    std::size_t node;
    Point centroid;
    std::uint32_t flow;
  };
  std::vector<Cluster> active;
  std::vector<std::vector<std::size_t>> children(1);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    tree.nodes.push_back({targets[t], std::nullopt, 1, t});
    children.emplace_back();
    active.push_back({tree.nodes.size() - 1, targets[t], 1});
  }
  while (active.size() > 1) {
    std::size_t best_a = 0;
    std::size_t best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double dist = squared_distance(active[a].centroid, active[b].centroid);
        if (dist < best) {
          best = dist;
          best_a = a;
          best_b = b;
        }
      }
    }
    const Cluster ca = active[best_a];
    const Cluster cb = active[best_b];
    const auto flow = ca.flow + cb.flow;
    const Point at = (1.0 / flow) * (static_cast<double>(ca.flow) * ca.centroid +
                                     static_cast<double>(cb.flow) * cb.centroid);
    tree.nodes.push_back({at, std::nullopt, flow, std::nullopt});
    const std::size_t parent = tree.nodes.size() - 1;
    children.push_back({ca.node, cb.node});
    tree.nodes[ca.node].parent = parent;
    tree.nodes[cb.node].parent = parent;
    active.erase(active.begin() + static_cast<long>(best_b));
    active.erase(active.begin() + static_cast<long>(best_a));
    active.push_back({parent, at, flow});
  }
  const std::size_t root = active.front().node;
  tree.nodes[root].parent = 0;

  // Nudge internal nodes toward the source, except those whose leaves all
  // coincide with them (nothing branches there).
  std::vector<Point> original(tree.nodes.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) original[i] = tree.nodes[i].at;
  for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].target) continue;
    std::vector<std::size_t> stack{i};
    bool spread = false;
    while (!stack.empty() && !spread) {
      const std::size_t k = stack.back();
      stack.pop_back();
      if (tree.nodes[k].target) {
        spread = !(original[k] == original[i]);
      } else {
        stack.insert(stack.end(), children[k].begin(), children[k].end());
      }
    }
    if (spread) tree.nodes[i].at = original[i] + kFlowNudge * (source - original[i]);
  }

  tree.edges.push_back({0, root, tree.nodes[root].leaves});
  std::vector<std::size_t> stack{root};
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    for (std::size_t child : children[k]) {
      tree.edges.push_back({k, child, tree.nodes[child].leaves});
      stack.push_back(child);
    }
  }
  tree.nodes[0].leaves = tree.nodes[root].leaves;
  return tree;
}

std::optional<Palette> parse_palette(std::string_view name) {
  if (name == "sequential") return Palette::Sequential;
  if (name == "diverging") return Palette::Diverging;
  return std::nullopt;
}

image::Rgb palette_color(Palette palette, double t) {
  static const std::array<image::Rgb, 5> sequential = {
      image::parse_hex("#ffffb2"), image::parse_hex("#fecc5c"), image::parse_hex("#fd8d3c"),
      image::parse_hex("#f03b20"), image::parse_hex("#bd0026")};
  static const std::array<image::Rgb, 5> diverging = {
      image::parse_hex("#2166ac"), image::parse_hex("#67a9cf"), image::parse_hex("#f7f7f7"),
      image::parse_hex("#ef8a62"), image::parse_hex("#b2182b")};
  const auto& stops = palette == Palette::Sequential ? sequential : diverging;
  t = std::clamp(t, 0.0, 1.0);
  const double scaled = t * static_cast<double>(stops.size() - 1);
  const auto lo = std::min(static_cast<std::size_t>(scaled), stops.size() - 2);
  return image::lerp(stops[lo], stops[lo + 1], scaled - static_cast<double>(lo));
}

Overlay overlay_layer(const std::map<std::uint32_t, double>& values, Palette palette, std::string name) {
  Overlay out;
  out.name = std::move(name);
  out.palette = palette;
  if (values.empty()) return out;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [doc, v] : values) {
    if (!std::isfinite(v)) throw InputError("overlay value for document " + std::to_string(doc) + " is not finite");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (const auto& [doc, v] : values) {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    out.entries.push_back({doc, v, t, image::to_hex(palette_color(palette, t)), {}, 0.0});
  }
  return out;
}

void locate_overlay(Overlay& overlay, std::span<const Point> positions, std::span<const double> sizes,
                    const terrain::TerrainConfig& config) {
  for (OverlayEntry& e : overlay.entries) {
    if (e.doc >= positions.size() || e.doc >= sizes.size()) throw InputError("overlay refers to an unknown document");
    e.at = positions[e.doc];
    e.radius = terrain::kernel_sigma(sizes[e.doc], config);
  }
}

Layer& MapScene::layer(LayerKind kind) {
  for (Layer& l : layers) {
    if (l.kind == kind) return l;
  }
  throw InputError("scene has no " + std::string(to_string(kind)) + " layer");
}

const Layer& MapScene::layer(LayerKind kind) const {
  return const_cast<MapScene*>(this)->layer(kind);
}

void MapScene::set_visible(std::span<const LayerKind> visible) {
  for (Layer& l : layers) {
    l.visible = l.kind == LayerKind::Landscape ||
                std::find(visible.begin(), visible.end(), l.kind) != visible.end();
  }
}

std::vector<std::uint8_t> landscape_rgba(const terrain::ElevationGrid& grid, std::span<const double> shade) {
  static const image::Rgb water = image::parse_hex("#9cc3dc");
  static const std::array<image::Rgb, 4> ramp = {image::parse_hex("#c7dfae"), image::parse_hex("#e3d8a4"),
                                                 image::parse_hex("#c9ae86"), image::parse_hex("#f4efe8")};
  std::vector<std::uint8_t> rgba(grid.h.size() * 4);
  for (std::size_t i = 0; i < grid.h.size(); ++i) {
    const double h = grid.h[i];
    image::Rgb base;
    double light = 1.0;
    if (h < grid.water_level) {
      base = water;
    } else {
      const double t = (h - grid.water_level) / (1.0 - grid.water_level);
      const double scaled = std::clamp(t, 0.0, 1.0) * 3.0;
      const auto lo = std::min<std::size_t>(static_cast<std::size_t>(scaled), 2);
      base = image::lerp(ramp[lo], ramp[lo + 1], scaled - static_cast<double>(lo));
      light = 0.45 + 0.55 * std::clamp(shade[i] / std::sqrt(0.5), 0.0, 1.3);
    }
    auto channel = [light](std::uint8_t c) {
      return static_cast<std::uint8_t>(std::clamp(std::lround(c * light), 0L, 255L));
    };
    rgba[i * 4 + 0] = channel(base.r);
    rgba[i * 4 + 1] = channel(base.g);
    rgba[i * 4 + 2] = channel(base.b);
    rgba[i * 4 + 3] = 255;
  }
  return rgba;
}

std::vector<HeatSpot> heat_spots(std::span<const Heat> heat, std::span<const Point> positions,
                                 std::span<const double> sizes, const terrain::TerrainConfig& config) {
  std::vector<HeatSpot> out;
  for (const Heat& h : heat) {
    if (h.doc >= positions.size()) continue;
    out.push_back({h.doc, positions[h.doc], h.value, terrain::kernel_sigma(sizes[h.doc], config)});
  }
  return out;
}

MapScene compose_scene(const SceneInputs& in) {
  if (in.grid == nullptr || in.corpus == nullptr) throw InputError("scene needs a grid and a corpus");
  if (in.size == 0) throw ConfigError("scene size must be positive");
  MapScene scene;
  scene.size = in.size;
  const auto shade = terrain::hillshade(*in.grid, in.terrain);
  Landscape landscape{in.grid->width, in.grid->height,
                      image::encode_png(in.grid->width, in.grid->height, landscape_rgba(*in.grid, shade))};
  scene.layers.push_back({LayerKind::Landscape, true, std::move(landscape)});
  scene.layers.push_back({LayerKind::Contours, true, terrain::contours(*in.grid, in.terrain.levels())});
  LabelOptions options;
  options.max_labels = in.max_labels;
  options.pixel_size = static_cast<double>(in.size);
  scene.layers.push_back(
      {LayerKind::Labels, true, place_labels(in.positions, *in.corpus, *in.grid, in.terrain, options)});
  scene.layers.push_back({LayerKind::Markers, true, std::vector<Marker>{}});
  scene.layers.push_back({LayerKind::Heat, true, std::vector<HeatSpot>{}});
  scene.layers.push_back({LayerKind::Overlay, true, Overlay{}});
  scene.layers.push_back({LayerKind::Arrows, true, Arrows{}});
  return scene;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // Control characters are not allowed in XML 1.0 text.
        if (static_cast<unsigned char>(c) >= 0x20 || c == '\t' || c == '\n') out += c;
    }
  }
  return out;
}

void render_layer(std::string& svg, const Layer& layer, double size) {
  const std::string id(to_string(layer.kind));
  switch (layer.kind) {
    case LayerKind::Landscape: {
      const auto& land = std::get<Landscape>(layer.payload);
      svg += "<g id=\"" + id + "\"><image x=\"0\" y=\"0\" width=\"" + num(size) + "\" height=\"" +
             num(size) + "\" preserveAspectRatio=\"none\" xlink:href=\"data:image/png;base64," +
             image::base64_encode(land.png) + "\"/></g>\n";
      break;
    }
    case LayerKind::Contours: {
      svg += "<g id=\"" + id + "\" fill=\"none\" stroke=\"#6b5a45\" stroke-opacity=\"0.55\" stroke-width=\"0.8\">\n";
      for (const auto& line : std::get<std::vector<terrain::Polyline>>(layer.payload)) {
        std::string d;
        for (std::size_t k = 0; k < line.points.size(); ++k) {
          const Point p = to_pixels(line.points[k], size);
          d += (k == 0 ? "M" : " L") + num(p.x) + " " + num(p.y);
        }
        if (line.closed) d += " Z";
        svg += "<path class=\"contour\" data-level=\"" + num(line.level) + "\" d=\"" + d + "\"/>\n";
      }
      svg += "</g>\n";
      break;
    }
    case LayerKind::Labels: {
      svg += "<g id=\"" + id + "\" font-family=\"sans-serif\" text-anchor=\"middle\" dominant-baseline=\"central\">\n";
      for (const auto& label : std::get<std::vector<Label>>(layer.payload)) {
        const Point p = to_pixels(label.anchor, size);
        const bool keyword = label.kind == LabelKind::Keyword;
        svg += std::string("<text class=\"") + (keyword ? "label-keyword" : "label-filename") +
               "\" x=\"" + num(p.x) + "\" y=\"" + num(p.y) + "\" font-size=\"" + num(label.font_size) +
               (keyword ? "\" fill=\"#3b3024\" fill-opacity=\"0.6\" letter-spacing=\"2\">"
                        : "\" fill=\"#1d1d1d\">") +
               xml_escape(label.text) + "</text>\n";
      }
      svg += "</g>\n";
      break;
    }
    case LayerKind::Markers: {
      svg += "<g id=\"" + id + "\">\n";
      for (const auto& m : std::get<std::vector<Marker>>(layer.payload)) {
        const Point p = to_pixels(m.at, size);
        svg += "<circle class=\"marker\" cx=\"" + num(p.x) + "\" cy=\"" + num(p.y) +
               "\" r=\"6.00\" fill=\"" + xml_escape(m.color) + "\" stroke=\"#ffffff\" stroke-width=\"1.50\"/>\n";
        if (!m.text.empty()) {
          svg += "<text class=\"marker-popup\" x=\"" + num(p.x + 9.0) + "\" y=\"" + num(p.y - 9.0) +
                 "\" font-family=\"sans-serif\" font-size=\"12.00\">" + xml_escape(m.text) + "</text>\n";
        }
      }
      svg += "</g>\n";
      break;
    }
    case LayerKind::Heat: {
      const auto& spots = std::get<std::vector<HeatSpot>>(layer.payload);
      svg += "<g id=\"" + id + "\">\n";
      if (!spots.empty()) {
        svg += "<defs><radialGradient id=\"heat-gradient\"><stop offset=\"0\" stop-color=\"#ff3300\" "
               "stop-opacity=\"0.85\"/><stop offset=\"1\" stop-color=\"#ff3300\" stop-opacity=\"0\"/>"
               "</radialGradient></defs>\n";
      }
      for (const auto& s : spots) {
        const Point p = to_pixels(s.at, size);
        svg += "<circle class=\"heat\" cx=\"" + num(p.x) + "\" cy=\"" + num(p.y) + "\" r=\"" +
               num(s.radius * size) + "\" fill=\"url(#heat-gradient)\" fill-opacity=\"" + num(s.value) + "\"/>\n";
      }
      svg += "</g>\n";
      break;
    }
    case LayerKind::Overlay: {
      svg += "<g id=\"" + id + "\" fill-opacity=\"0.75\">\n";
      for (const auto& e : std::get<Overlay>(layer.payload).entries) {
        const Point p = to_pixels(e.at, size);
        svg += "<circle class=\"overlay\" cx=\"" + num(p.x) + "\" cy=\"" + num(p.y) + "\" r=\"" +
               num(std::max(4.0, e.radius * size)) + "\" fill=\"" + e.color + "\"/>\n";
      }
      svg += "</g>\n";
      break;
    }
    case LayerKind::Arrows: {
      svg += "<g id=\"" + id + "\" fill=\"none\" stroke=\"#1f2a6b\" stroke-opacity=\"0.8\" stroke-linecap=\"round\">\n";
      for (const auto& tree : std::get<Arrows>(layer.payload).trees) {
        for (const FlowEdge& e : tree.edges) {
          const Point a = to_pixels(tree.nodes[e.from].at, size);
          const Point b = to_pixels(tree.nodes[e.to].at, size);
          const bool leaf = tree.nodes[e.to].target.has_value();
          svg += "<path class=\"arrow\" d=\"M" + num(a.x) + " " + num(a.y) + " L" + num(b.x) + " " + num(b.y) +
                 "\" stroke-width=\"" + num(1.5 * e.thickness) + "\"" +
                 (leaf ? " marker-end=\"url(#arrowhead)\"" : "") + "/>\n";
        }
      }
      svg += "</g>\n";
      break;
    }
  }
}

}  // namespace

std::string render_svg(const MapScene& scene) {
  const double size = static_cast<double>(scene.size);
  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" "
         "version=\"1.1\" width=\"" + num(size) + "\" height=\"" + num(size) + "\" viewBox=\"0 0 " +
         num(size) + " " + num(size) + "\">\n";
  bool arrows_visible = false;
  for (const Layer& layer : scene.layers) {
    if (layer.kind == LayerKind::Arrows && layer.visible) arrows_visible = true;
  }
  if (arrows_visible) {
    svg += "<defs><marker id=\"arrowhead\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"4\" "
           "markerHeight=\"4\" orient=\"auto\"><polygon points=\"0,0 10,5 0,10\" fill=\"#1f2a6b\"/>"
           "</marker></defs>\n";
  }
  for (LayerKind kind : kAllLayers) {
    for (const Layer& layer : scene.layers) {
      if (layer.kind == kind && layer.visible) render_layer(svg, layer, size);
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace codemap::scene
