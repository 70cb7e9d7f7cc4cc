#include "codemap/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "codemap/error.hpp"
#include "codemap/serialize.hpp"

namespace codemap {

using nlohmann::json;

void BuildSettings::validate() const {
  layout.validate();
  terrain.validate();
  if (resolution < 16 || resolution > 4096) throw ConfigError("grid resolution must lie in [16, 4096]");
  for (const auto& a : anchors) {
    const Point p = a.position;
    if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
      throw ConfigError("anchor " + a.key + " lies outside the unit square");
    }
    if (a.key.empty()) throw ConfigError("anchor key must not be empty");
  }
}

namespace {

layout::AnchorTargets targets_for(const MapModel& m, const std::vector<layout::AnchorSpec>& anchors) {
  return layout::resolve_anchors(anchors, m.settings.layout.anchor_weight, m.corpus, m.dissimilarity,
                                 m.settings.layout.alpha);
}

std::vector<std::string> paths_of(const analysis::Corpus& corpus) {
  std::vector<std::string> paths;
  paths.reserve(corpus.size());
  for (const auto& doc : corpus.documents) paths.push_back(doc.path);
  return paths;
}

}  // namespace

MapModel prepare_model(analysis::Corpus corpus, const BuildSettings& settings) {
  settings.validate();
  MapModel m;
  m.settings = settings;
  m.corpus = std::move(corpus);
  if (m.corpus.term_vectors.size() != m.corpus.size()) analysis::build_term_vectors(m.corpus);
  m.graph = analysis::extract_dependencies(m.corpus);
  m.sizes = analysis::size_metric(m.corpus, m.graph, settings.ingest.metric);
  m.dissimilarity = layout::combine(layout::lexical_dissimilarity(m.corpus),
                                    layout::structural_dissimilarity(m.graph), settings.layout.alpha);
  return m;
}

MapModel build_model(analysis::Corpus corpus, const BuildSettings& settings, const layout::Layout* previous) {
  MapModel m = prepare_model(std::move(corpus), settings);
  const auto targets = targets_for(m, settings.anchors);
  const auto paths = paths_of(m.corpus);
  m.layout = previous != nullptr
                 ? layout::layout_incremental(m.dissimilarity, paths, *previous, targets, settings.layout)
                 : layout::layout_fresh(m.dissimilarity, paths, targets, settings.layout);
  m.grid = terrain::build_elevation(m.layout.positions, m.sizes, settings.terrain, settings.resolution);
  return m;
}

MapModel build_model(const std::filesystem::path& root, const BuildSettings& settings,
                     const layout::Layout* previous) {
  settings.validate();
  return build_model(analysis::ingest(root, settings.ingest), settings, previous);
}

MapModel relayout(const MapModel& model, std::vector<layout::AnchorSpec> anchors) {
  MapModel m = model;
  m.settings.anchors = std::move(anchors);
  m.settings.validate();
  const auto targets = targets_for(m, m.settings.anchors);
  m.layout = layout::layout_incremental(m.dissimilarity, paths_of(m.corpus), model.layout, targets,
                                        m.settings.layout);
  m.grid = terrain::build_elevation(m.layout.positions, m.sizes, m.settings.terrain, m.settings.resolution);
  return m;
}

json settings_json(const BuildSettings& s) {
  json ingest{{"extensions", s.ingest.extensions},
              {"exclude", s.ingest.exclude},
              {"metric", analysis::to_string(s.ingest.metric)}};
  ingest["stopwords"] = s.ingest.stopwords_file ? json(s.ingest.stopwords_file->generic_string()) : json(nullptr);
  json anchors = json::array();
  for (const auto& a : s.anchors) anchors.push_back(serial::anchor_spec(a));
  return {{"ingest", std::move(ingest)},
          {"layout", serial::layout_config(s.layout)},
          {"terrain", serial::terrain_config(s.terrain)},
          {"resolution", s.resolution},
          {"anchors", std::move(anchors)}};
}

BuildSettings parse_settings(const json& j) {
  BuildSettings s;
  try {
    const json& ingest = j.at("ingest");
    s.ingest.extensions = ingest.at("extensions").get<std::vector<std::string>>();
    s.ingest.exclude = ingest.at("exclude").get<std::vector<std::string>>();
    s.ingest.metric = analysis::parse_size_metric(ingest.at("metric").get<std::string>());
    if (!ingest.at("stopwords").is_null()) s.ingest.stopwords_file = ingest.at("stopwords").get<std::string>();
    s.layout = serial::parse_layout_config(j.at("layout"));
    s.terrain = serial::parse_terrain_config(j.at("terrain"));
    s.resolution = j.at("resolution").get<std::size_t>();
    for (const auto& a : j.at("anchors")) s.anchors.push_back(serial::parse_anchor_spec(a));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad settings: ") + e.what());
  } catch (const ConfigError& e) {
    throw InputError(std::string("bad settings: ") + e.what());
  }
  return s;
}

std::string config_hash(const BuildSettings& settings) {
  const std::string canonical = settings_json(settings).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string build_timestamp() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

MapFile to_mapfile(const MapModel& model, bool include_grid) {
  MapFile f;
  f.root = model.corpus.root.generic_string();
  for (std::size_t i = 0; i < model.corpus.size(); ++i) {
    const auto& doc = model.corpus.documents[i];
    MapFileDocument d{doc.path, doc.size, doc.kloc, doc.language, {}};
    for (const auto& e : model.corpus.term_vectors[i]) d.terms.emplace(model.corpus.terms[e.column], e.weight);
    f.documents.push_back(std::move(d));
  }
  f.layout = model.layout;
  f.settings = model.settings;
  if (include_grid) f.grid = model.grid;
  f.timestamp = build_timestamp();
  f.config_hash = config_hash(model.settings);
  return f;
}

json to_json(const MapFile& f) {
  json documents = json::array();
  for (const auto& d : f.documents) {
    documents.push_back(
        {{"path", d.path}, {"size", d.size}, {"kloc", d.kloc}, {"language", d.language}, {"terms", d.terms}});
  }
  json j{{"schema", f.schema},
         {"corpus", {{"root", f.root}, {"documents", std::move(documents)}}},
         {"layout", serial::layout(f.layout)},
         {"settings", settings_json(f.settings)},
         {"build", {{"timestamp", f.timestamp}, {"config_hash", f.config_hash}}}};
  j["grid"] = f.grid ? serial::grid(*f.grid) : json(nullptr);
  return j;
}

MapFile mapfile_from_json(const json& j) {
  MapFile f;
  try {
    f.schema = j.at("schema").get<int>();
    if (f.schema != MapFile::kSchema) {
      throw InputError("unsupported map schema " + std::to_string(f.schema) + " (expected " +
                       std::to_string(MapFile::kSchema) + ")");
    }
    const json& corpus = j.at("corpus");
    f.root = corpus.at("root").get<std::string>();
    for (const auto& d : corpus.at("documents")) {
      f.documents.push_back({d.at("path").get<std::string>(), d.at("size").get<double>(),
                             d.at("kloc").get<double>(), d.at("language").get<std::string>(),
                             d.at("terms").get<std::map<std::string, double>>()});
    }
    f.layout = serial::parse_layout(j.at("layout"));
    f.settings = parse_settings(j.at("settings"));
    if (!j.at("grid").is_null()) f.grid = serial::parse_grid(j.at("grid"));
    f.timestamp = j.at("build").at("timestamp").get<std::string>();
    f.config_hash = j.at("build").at("config_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed map file: ") + e.what());
  }
  if (f.layout.positions.size() != f.documents.size()) {
    throw InputError("map file layout and corpus disagree on document count");
  }
  for (std::size_t i = 0; i < f.documents.size(); ++i) {
    if (f.layout.paths[i] != f.documents[i].path) throw InputError("map file layout order differs from corpus");
  }
  return f;
}

std::string serialize(const MapFile& file) { return to_json(file).dump(2) + "\n"; }

MapFile parse_mapfile(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("map file is not valid JSON: ") + e.what());
  }
  return mapfile_from_json(j);
}

MapFile load_mapfile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read map file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_mapfile(text.str());
}

void save_mapfile(const MapFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write map file " + path.string());
  out << serialize(file);
  if (!out) throw IoError("failed writing map file " + path.string());
}

terrain::ElevationGrid mapfile_grid(const MapFile& file) {
  if (file.grid) return *file.grid;
  std::vector<double> sizes;
  for (const auto& d : file.documents) sizes.push_back(d.size);
  return terrain::build_elevation(file.layout.positions, sizes, file.settings.terrain, file.settings.resolution);
}

MapModel model_from_mapfile(const MapFile& file) {
  std::error_code ec;
  const bool have_root = !file.root.empty() && std::filesystem::is_directory(file.root, ec);
  if (have_root) {
    analysis::Corpus corpus = analysis::ingest(file.root, file.settings.ingest);
    bool same = corpus.size() == file.documents.size();
    for (std::size_t i = 0; same && i < corpus.size(); ++i) same = corpus.documents[i].path == file.documents[i].path;
    if (!same) return build_model(std::move(corpus), file.settings, &file.layout);
    MapModel m = prepare_model(std::move(corpus), file.settings);
    m.layout = file.layout;
    m.grid = mapfile_grid(file);
    return m;
  }
  MapModel m;
  m.settings = file.settings;
  m.corpus = summary_corpus(file);
  m.graph.n = static_cast<std::uint32_t>(m.corpus.size());
  for (const auto& d : file.documents) m.sizes.push_back(d.size);
  m.dissimilarity = layout::combine(layout::lexical_dissimilarity(m.corpus),
                                    layout::structural_dissimilarity(m.graph), file.settings.layout.alpha);
  m.layout = file.layout;
  m.grid = mapfile_grid(file);
  return m;
}

analysis::Corpus summary_corpus(const MapFile& file) {
  analysis::Corpus c;
  c.root = file.root;
  std::set<std::string> terms;
  for (const auto& d : file.documents) {
    for (const auto& [t, w] : d.terms) terms.insert(t);
  }
  for (const auto& t : terms) {
    c.vocabulary.emplace(t, static_cast<std::uint32_t>(c.terms.size()));
    c.terms.push_back(t);
  }
  c.idf.assign(c.terms.size(), 0.0);
  for (std::size_t i = 0; i < file.documents.size(); ++i) {
    const auto& src = file.documents[i];
    analysis::Document doc;
    doc.id = static_cast<std::uint32_t>(i);
    doc.path = src.path;
    doc.size = src.size;
    doc.kloc = src.kloc;
    doc.language = src.language;
    analysis::SparseVector v;
    for (const auto& [t, w] : src.terms) v.push_back({c.vocabulary.at(t), w});
    c.documents.push_back(std::move(doc));
    c.term_vectors.push_back(std::move(v));
  }
  return c;
}

}  // namespace codemap
