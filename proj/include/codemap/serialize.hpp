#pragma once

// JSON forms of the in-memory model. Field names are snake_case.

#include <nlohmann/json.hpp>

#include "codemap/layout.hpp"
#include "codemap/scene.hpp"
#include "codemap/terrain.hpp"

namespace codemap::serial {

using nlohmann::json;

json point(Point p);
Point parse_point(const json& j);  // [x, y]

json anchor_spec(const layout::AnchorSpec& spec);
layout::AnchorSpec parse_anchor_spec(const json& j);

json layout(const layout::Layout& layout);
layout::Layout parse_layout(const json& j);

json layout_config(const layout::LayoutConfig& config);
layout::LayoutConfig parse_layout_config(const json& j);

json terrain_config(const terrain::TerrainConfig& config);
terrain::TerrainConfig parse_terrain_config(const json& j);

json grid(const terrain::ElevationGrid& grid);
terrain::ElevationGrid parse_grid(const json& j);

json polyline(const terrain::Polyline& line);
json label(const scene::Label& label);
json flow_tree(const scene::FlowTree& tree);
json overlay(const scene::Overlay& overlay);
json heat(std::span<const scene::Heat> heat);
json layer(const scene::Layer& layer);
json scene(const scene::MapScene& scene);

}  // namespace codemap::serial
