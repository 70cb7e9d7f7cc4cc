#pragma once

// Build configuration files (TOML or JSON) merged into BuildSettings.

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

#include "codemap/pipeline.hpp"

namespace codemap::config {

// The TOML subset config files use: [tables], key = value, strings, numbers,
// booleans and (possibly multi-line) arrays. Throws ConfigError with a line
// number on anything else.
nlohmann::json parse_toml(std::string_view text);

// Chooses JSON for a .json extension, TOML otherwise.
nlohmann::json load_file(const std::filesystem::path& path);

// Recognised keys may sit at the top level or inside [ingest], [layout] and
// [terrain] tables. Unknown keys are an error. A relative stopwords path is
// taken relative to `base`.
void apply(const nlohmann::json& config, BuildSettings& settings,
           const std::filesystem::path& base = {});

// `{"anchors": {"src/db/": [0.5, 0.1]}, "weight": 2.0}`; throws ConfigError.
std::vector<layout::AnchorSpec> parse_anchors(const nlohmann::json& body, double* weight = nullptr);

}  // namespace codemap::config
