#include "codemap/serialize.hpp"

#include "codemap/error.hpp"
#include "codemap/image.hpp"

namespace codemap::serial {

namespace {

std::string_view kind_name(layout::AnchorKind kind) {
  switch (kind) {
    case layout::AnchorKind::Document: return "document";
    case layout::AnchorKind::Prefix: return "prefix";
    case layout::AnchorKind::External: return "external";
  }
  return "external";
}

layout::AnchorKind parse_kind(const std::string& name) {
  if (name == "document") return layout::AnchorKind::Document;
  if (name == "prefix") return layout::AnchorKind::Prefix;
  if (name == "external") return layout::AnchorKind::External;
  throw InputError("unknown anchor kind: " + name);
}

template <typename T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw InputError(std::string("missing field: ") + name);
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad field ") + name + ": " + e.what());
  }
}

}  // namespace

json point(Point p) { return json::array({p.x, p.y}); }

Point parse_point(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InputError("a point must be an [x, y] pair of numbers");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json anchor_spec(const layout::AnchorSpec& spec) {
  json j{{"key", spec.key}, {"position", point(spec.position)}};
  if (!spec.terms.empty()) j["terms"] = spec.terms;
  return j;
}

layout::AnchorSpec parse_anchor_spec(const json& j) {
  layout::AnchorSpec spec;
  spec.key = field<std::string>(j, "key");
  spec.position = parse_point(j.at("position"));
  if (j.contains("terms")) spec.terms = field<std::vector<std::string>>(j, "terms");
  return spec;
}

json layout(const layout::Layout& l) {
  json positions = json::array();
  for (std::size_t i = 0; i < l.positions.size(); ++i) {
    positions.push_back({{"path", l.paths.at(i)}, {"x", l.positions[i].x}, {"y", l.positions[i].y}});
  }
  json anchors = json::array();
  for (const auto& a : l.anchors) {
    json entry = anchor_spec(a.spec);
    entry["kind"] = kind_name(a.kind);
    entry["members"] = a.members;
    anchors.push_back(std::move(entry));
  }
  return {{"positions", std::move(positions)},
          {"anchors", std::move(anchors)},
          {"anchor_weight", l.anchor_weight},
          {"stress", l.stress},
          {"raw_stress", l.raw_stress},
          {"iterations", l.iterations},
          {"converged", l.converged},
          {"seed", l.seed},
          {"stress_history", l.stress_history}};
}

layout::Layout parse_layout(const json& j) {
  layout::Layout l;
  for (const auto& p : j.at("positions")) {
    l.paths.push_back(field<std::string>(p, "path"));
    l.positions.push_back({field<double>(p, "x"), field<double>(p, "y")});
  }
  for (const auto& a : j.at("anchors")) {
    layout::ResolvedAnchor r;
    r.spec = parse_anchor_spec(a);
    r.kind = parse_kind(field<std::string>(a, "kind"));
    r.members = field<std::vector<std::uint32_t>>(a, "members");
    l.anchors.push_back(std::move(r));
  }
  l.anchor_weight = field<double>(j, "anchor_weight");
  l.stress = field<double>(j, "stress");
  l.raw_stress = field<double>(j, "raw_stress");
  l.iterations = field<unsigned>(j, "iterations");
  l.converged = field<bool>(j, "converged");
  l.seed = field<std::uint64_t>(j, "seed");
  l.stress_history = field<std::vector<double>>(j, "stress_history");
  return l;
}

json layout_config(const layout::LayoutConfig& c) {
  return {{"alpha", c.alpha}, {"knn", c.knn}, {"max_iter", c.max_iter},
          {"eps", c.eps},     {"seed", c.seed}, {"anchor_weight", c.anchor_weight}};
}

layout::LayoutConfig parse_layout_config(const json& j) {
  layout::LayoutConfig c;
  c.alpha = field<double>(j, "alpha");
  c.knn = field<unsigned>(j, "knn");
  c.max_iter = field<unsigned>(j, "max_iter");
  c.eps = field<double>(j, "eps");
  c.seed = field<std::uint64_t>(j, "seed");
  c.anchor_weight = field<double>(j, "anchor_weight");
  return c;
}

json terrain_config(const terrain::TerrainConfig& c) {
  return {{"sigma_scale", c.sigma_scale},       {"sigma_min", c.sigma_min},
          {"sigma_max", c.sigma_max},           {"light_azimuth", c.light_azimuth},
          {"light_altitude", c.light_altitude}, {"contour_levels", c.contour_levels},
          {"water_level", c.water_level},       {"exaggeration", c.exaggeration}};
}

terrain::TerrainConfig parse_terrain_config(const json& j) {
  terrain::TerrainConfig c;
  c.sigma_scale = field<double>(j, "sigma_scale");
  c.sigma_min = field<double>(j, "sigma_min");
  c.sigma_max = field<double>(j, "sigma_max");
  c.light_azimuth = field<double>(j, "light_azimuth");
  c.light_altitude = field<double>(j, "light_altitude");
  c.contour_levels = field<unsigned>(j, "contour_levels");
  c.water_level = field<double>(j, "water_level");
  c.exaggeration = field<double>(j, "exaggeration");
  return c;
}

json grid(const terrain::ElevationGrid& g) {
  return {{"width", g.width}, {"height", g.height}, {"cell", g.cell},
          {"water_level", g.water_level}, {"h", g.h}};
}

terrain::ElevationGrid parse_grid(const json& j) {
  terrain::ElevationGrid g;
  g.width = field<std::size_t>(j, "width");
  g.height = field<std::size_t>(j, "height");
  g.cell = field<double>(j, "cell");
  g.water_level = field<double>(j, "water_level");
  g.h = field<std::vector<double>>(j, "h");
  if (g.h.size() != g.width * g.height) throw InputError("grid height values do not match its dimensions");
  return g;
}

json polyline(const terrain::Polyline& line) {
  json points = json::array();
  for (Point p : line.points) points.push_back(point(p));
  return {{"level", line.level}, {"closed", line.closed}, {"points", std::move(points)}};
}

json label(const scene::Label& l) {
  return {{"text", l.text},
          {"anchor", point(l.anchor)},
          {"font_size", l.font_size},
          {"kind", l.kind == scene::LabelKind::Keyword ? "keyword" : "filename"}};
}

json flow_tree(const scene::FlowTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    json node{{"at", point(n.at)}, {"leaves", n.leaves}};
    node["parent"] = n.parent ? json(*n.parent) : json(nullptr);
    node["target"] = n.target ? json(*n.target) : json(nullptr);
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const auto& e : tree.edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"thickness", e.thickness}});
  return {{"source", point(tree.source())}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

json overlay(const scene::Overlay& o) {
  json entries = json::array();
  for (const auto& e : o.entries) {
    entries.push_back({{"doc", e.doc}, {"value", e.value}, {"t", e.t}, {"color", e.color},
                       {"at", point(e.at)}, {"radius", e.radius}});
  }
  return {{"name", o.name},
          {"palette", o.palette == scene::Palette::Sequential ? "sequential" : "diverging"},
          {"entries", std::move(entries)}};
}

json heat(std::span<const scene::Heat> heat) {
  json out = json::array();
  for (const auto& h : heat) out.push_back({{"doc", h.doc}, {"value", h.value}, {"rank", h.rank}});
  return out;
}

json layer(const scene::Layer& l) {
  json j{{"kind", scene::to_string(l.kind)}, {"visible", l.visible}};
  switch (l.kind) {
    case scene::LayerKind::Landscape: {
      const auto& land = std::get<scene::Landscape>(l.payload);
      j["width"] = land.width;
      j["height"] = land.height;
      j["png_base64"] = image::base64_encode(land.png);
      break;
    }
    case scene::LayerKind::Contours: {
      json lines = json::array();
      for (const auto& line : std::get<std::vector<terrain::Polyline>>(l.payload)) lines.push_back(polyline(line));
      j["polylines"] = std::move(lines);
      break;
    }
    case scene::LayerKind::Labels: {
      json labels = json::array();
      for (const auto& lab : std::get<std::vector<scene::Label>>(l.payload)) labels.push_back(label(lab));
      j["labels"] = std::move(labels);
      break;
    }
    case scene::LayerKind::Markers: {
      json markers = json::array();
      for (const auto& m : std::get<std::vector<scene::Marker>>(l.payload)) {
        markers.push_back({{"doc", m.doc}, {"at", point(m.at)}, {"color", m.color}, {"text", m.text}});
      }
      j["markers"] = std::move(markers);
      break;
    }
    case scene::LayerKind::Heat: {
      json spots = json::array();
      for (const auto& s : std::get<std::vector<scene::HeatSpot>>(l.payload)) {
        spots.push_back({{"doc", s.doc}, {"at", point(s.at)}, {"value", s.value}, {"radius", s.radius}});
      }
      j["spots"] = std::move(spots);
      break;
    }
    case scene::LayerKind::Overlay:
      j["overlay"] = overlay(std::get<scene::Overlay>(l.payload));
      break;
    case scene::LayerKind::Arrows: {
      json trees = json::array();
      for (const auto& t : std::get<scene::Arrows>(l.payload).trees) trees.push_back(flow_tree(t));
      j["trees"] = std::move(trees);
      break;
    }
  }
  return j;
}

json scene(const scene::MapScene& s) {
  json layers = json::array();
  for (const auto& l : s.layers) layers.push_back(layer(l));
  return {{"size", s.size}, {"layers", std::move(layers)}};
}

}  // namespace codemap::serial
