#pragma once

// Source tree to map: analysis, layout (fresh or warm-started) and terrain,
// plus the MapFile that stores the result.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codemap/analysis.hpp"
#include "codemap/layout.hpp"
#include "codemap/terrain.hpp"

namespace codemap {

struct BuildSettings {
  analysis::IngestConfig ingest = analysis::IngestConfig::defaults();
  layout::LayoutConfig layout;
  terrain::TerrainConfig terrain;
  std::size_t resolution = 256;
  std::vector<layout::AnchorSpec> anchors;

  void validate() const;  // throws ConfigError
};

// Everything derived from one corpus.
struct MapModel {
  analysis::Corpus corpus;
  analysis::DependencyGraph graph;
  std::vector<double> sizes;
  layout::DissimilarityMatrix dissimilarity;
  layout::Layout layout;
  terrain::ElevationGrid grid;
  BuildSettings settings;
};

// Analysis and dissimilarities only; layout and grid are left empty.
MapModel prepare_model(analysis::Corpus corpus, const BuildSettings& settings);

// Runs the whole pipeline on an ingested corpus. With `previous` the layout
// is warm-started from it.
MapModel build_model(analysis::Corpus corpus, const BuildSettings& settings,
                     const layout::Layout* previous = nullptr);

MapModel build_model(const std::filesystem::path& root, const BuildSettings& settings,
                     const layout::Layout* previous = nullptr);

// Same corpus and settings, new anchors; warm-started from the model's layout.
MapModel relayout(const MapModel& model, std::vector<layout::AnchorSpec> anchors);

struct MapFileDocument {
  std::string path;
  double size = 0.0;
  double kloc = 0.0;
  std::string language;
  std::map<std::string, double> terms;  // tf-idf weights

  friend bool operator==(const MapFileDocument&, const MapFileDocument&) = default;
};

struct MapFile {
  static constexpr int kSchema = 1;

  int schema = kSchema;
  std::string root;
  std::vector<MapFileDocument> documents;
  layout::Layout layout;
  BuildSettings settings;
  std::optional<terrain::ElevationGrid> grid;
  std::string timestamp;
  std::string config_hash;
};

// FNV-1a over the canonical JSON of every layout- and terrain-affecting setting.
std::string config_hash(const BuildSettings& settings);

// SOURCE_DATE_EPOCH when set, otherwise the current time; ISO 8601 UTC.
std::string build_timestamp();

MapFile to_mapfile(const MapModel& model, bool include_grid);

nlohmann::json to_json(const MapFile& file);
MapFile mapfile_from_json(const nlohmann::json& j);  // throws InputError

std::string serialize(const MapFile& file);  // pretty JSON with a trailing newline
MapFile parse_mapfile(std::string_view text);
MapFile load_mapfile(const std::filesystem::path& path);
void save_mapfile(const MapFile& file, const std::filesystem::path& path);

// The stored grid, or one rebuilt from the stored layout and terrain config.
terrain::ElevationGrid mapfile_grid(const MapFile& file);

// Live model for a stored map. The stored source root is re-ingested; when
// its files match the map the stored layout is kept as is, otherwise the
// layout is warm-started from it. Without a readable root the summary corpus
// stands in (no tokens, no dependency edges).
MapModel model_from_mapfile(const MapFile& file);

// Corpus stand-in built from the stored summary (paths, sizes, term weights);
// enough for labels and overlays.
analysis::Corpus summary_corpus(const MapFile& file);

nlohmann::json settings_json(const BuildSettings& settings);
BuildSettings parse_settings(const nlohmann::json& j);

}  // namespace codemap
