#include "codemap/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <map>
#include <optional>
#include <sstream>

#include <pthread.h>

#include <CLI11.hpp>

#include "codemap/config.hpp"
#include "codemap/error.hpp"
#include "codemap/scene.hpp"
#include "codemap/service.hpp"

namespace codemap::cli {

namespace {

// Flags shared by `build` and `serve <root>`; unset options leave the config
// file (or defaults) alone.
struct BuildFlags {
  std::optional<std::string> config_file;
  std::optional<double> alpha;
  std::optional<unsigned> knn;
  std::optional<std::string> metric;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> max_iter;
  std::optional<double> eps;
  std::optional<std::size_t> resolution;
  std::optional<std::string> anchors_file;
  std::vector<std::string> extensions;
  std::vector<std::string> exclude;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_file, "TOML or JSON config file (flags take precedence)");
    cmd.add_option("--alpha", alpha, "lexical weight in the combined dissimilarity, in [0,1]");
    cmd.add_option("--knn", knn, "Isomap neighbourhood size");
    cmd.add_option("--metric", metric, "size metric: kloc, tokens or fanin");
    cmd.add_option("--seed", seed, "random seed");
    cmd.add_option("--max-iter", max_iter, "SMACOF iteration cap");
    cmd.add_option("--eps", eps, "relative stress tolerance");
    cmd.add_option("--resolution", resolution, "elevation grid resolution");
    cmd.add_option("--anchors", anchors_file, "JSON anchor file");
    cmd.add_option("--ext", extensions, "accepted file extensions (repeatable)");
    cmd.add_option("--exclude", exclude, "exclude glob (repeatable)");
  }

  // Starts from `inherited` (the previous map's settings) when no config file
  // is given.
  BuildSettings settings(const BuildSettings* inherited) const {
    BuildSettings s;
    if (config_file) {
      const std::filesystem::path path = *config_file;
      config::apply(config::load_file(path), s, path.parent_path());
    } else if (inherited != nullptr) {
      s = *inherited;
    }
    if (alpha) s.layout.alpha = *alpha;
    if (knn) s.layout.knn = *knn;
    if (metric) s.ingest.metric = analysis::parse_size_metric(*metric);
    if (seed) s.layout.seed = *seed;
    if (max_iter) s.layout.max_iter = *max_iter;
    if (eps) s.layout.eps = *eps;
    if (resolution) s.resolution = *resolution;
    if (!extensions.empty()) s.ingest.extensions = extensions;
    if (!exclude.empty()) s.ingest.exclude = exclude;
    if (anchors_file) {
      std::ifstream in(*anchors_file);
      if (!in) throw ConfigError("cannot read anchor file " + *anchors_file);
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("anchor file " + *anchors_file + ": " + e.what());
      }
      s.anchors = config::parse_anchors(body, &s.layout.anchor_weight);
    }
    s.validate();
    return s;
  }
};

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

int cmd_build(const std::string& root, const BuildFlags& flags, const std::optional<std::string>& prev,
              const std::string& output, bool no_grid, std::ostream& out, std::ostream& err) {
  std::optional<MapFile> previous;
  if (prev) previous = load_mapfile(*prev);
  const BuildSettings settings = flags.settings(previous ? &previous->settings : nullptr);
  const MapModel model = build_model(root, settings, previous ? &previous->layout : nullptr);
  const MapFile file = to_mapfile(model, !no_grid);
  if (output == "-") {
    out << serialize(file);
  } else {
    save_mapfile(file, output);
    out << "built " << model.corpus.size() << " documents"
        << " (stress " << fixed(model.layout.stress) << ", " << model.layout.iterations << " iterations)"
        << " -> " << output << "\n";
  }
  for (const auto& w : model.corpus.warnings) err << "warning: " << w << "\n";
  return kOk;
}

int cmd_render(const std::string& mapfile, const std::string& output, const std::string& layers,
               std::size_t width, std::size_t max_labels, std::ostream& out) {
  if (width == 0) throw ConfigError("--width must be positive");
  std::vector<scene::LayerKind> visible;
  std::stringstream list(layers);
  std::string name;
  while (std::getline(list, name, ',')) {
    if (name.empty()) continue;
    const auto kind = scene::parse_layer(name);
    if (!kind) throw ConfigError("unknown layer: " + name);
    visible.push_back(*kind);
  }
  const MapFile file = load_mapfile(mapfile);
  const analysis::Corpus corpus = summary_corpus(file);
  const terrain::ElevationGrid grid = mapfile_grid(file);
  scene::SceneInputs in;
  in.positions = file.layout.positions;
  in.corpus = &corpus;
  in.grid = &grid;
  in.terrain = file.settings.terrain;
  in.size = width;
  in.max_labels = max_labels;
  scene::MapScene composed = scene::compose_scene(in);
  composed.set_visible(visible);
  const std::string svg = scene::render_svg(composed);
  if (output == "-") {
    out << svg;
    return kOk;
  }
  std::ofstream file_out(output, std::ios::binary | std::ios::trunc);
  if (!file_out) throw IoError("cannot write " + output);
  file_out << svg;
  if (!file_out) throw IoError("failed writing " + output);
  out << "rendered " << file.documents.size() << " documents -> " << output << "\n";
  return kOk;
}

int cmd_diff(const std::string& old_path, const std::string& new_path, double threshold, bool as_json,
             std::ostream& out) {
  const MapFile before = load_mapfile(old_path);
  const MapFile after = load_mapfile(new_path);
  const StabilityReport r = compare(before, after);
  const bool ok = r.shared > 0 && r.mean_displacement <= threshold;
  if (as_json) {
    nlohmann::json j{{"shared", r.shared},
                     {"added", r.added},
                     {"removed", r.removed},
                     {"mean_displacement", r.mean_displacement},
                     {"max_displacement", r.max_displacement},
                     {"max_path", r.max_path},
                     {"threshold", threshold},
                     {"stable", ok}};
    out << j.dump(2) << "\n";
    return ok ? kOk : kFailure;
  }
  if (r.shared == 0) {
    out << "no shared documents (" << r.removed.size() << " removed, " << r.added.size() << " added)\n";
    return kFailure;
  }
  out << "shared documents: " << r.shared << "\n";
  out << "added: " << r.added.size() << "\n";
  for (const auto& p : r.added) out << "  + " << p << "\n";
  out << "removed: " << r.removed.size() << "\n";
  for (const auto& p : r.removed) out << "  - " << p << "\n";
  out << "mean displacement: " << fixed(r.mean_displacement) << "\n";
  out << "max displacement: " << fixed(r.max_displacement) << " (" << r.max_path << ")\n";
  out << (ok ? "stable" : "unstable") << " (threshold " << fixed(threshold, 3) << ")\n";
  return ok ? kOk : kFailure;
}

int cmd_serve(const std::string& input, const BuildFlags& flags, std::optional<int> port, const std::string& host,
              const std::optional<std::string>& static_dir, std::ostream& out) {
  if (!port) {
    if (const char* env = std::getenv("CODEMAP_PORT"); env != nullptr && *env != '\0') {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (*end != '\0' || v < 0 || v > 65535) throw ConfigError("CODEMAP_PORT must be a port number");
      port = static_cast<int>(v);
    } else {
      port = 8080;
    }
  }
  if (*port < 0 || *port > 65535) throw ConfigError("--port must lie in [0, 65535]");

  MapModel model;
  std::error_code ec;
  if (std::filesystem::is_directory(input, ec)) {
    model = build_model(input, flags.settings(nullptr));
  } else {
    model = model_from_mapfile(load_mapfile(input));
  }

  // Block the shutdown signals before any service thread exists so that only
  // sigwait below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::ServiceOptions options;
  options.host = host;
  options.port = *port;
  if (static_dir) options.static_dir = *static_dir;
  const std::size_t documents = model.corpus.size();
  service::MapService svc(std::move(model), options);
  const int bound = svc.start();
  out << "codemap: serving " << documents << " documents at http://" << host << ":" << bound << "/" << "\n";
  out << "viewer: http://" << host << ":" << bound << "/viewer/" << "\n";
  out.flush();
  int received = 0;
  sigwait(&signals, &received);
  out << "codemap: shutting down\n";
  svc.stop();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
  return kOk;
}

}  // namespace

StabilityReport compare(const MapFile& before, const MapFile& after) {
  StabilityReport r;
  std::map<std::string, Point> old_positions;
  for (std::size_t i = 0; i < before.layout.paths.size(); ++i) {
    old_positions.emplace(before.layout.paths[i], before.layout.positions[i]);
  }
  std::vector<Point> target;
  std::vector<Point> moving;
  std::vector<std::string> shared;
  std::map<std::string, bool> seen;
  for (std::size_t i = 0; i < after.layout.paths.size(); ++i) {
    const auto& path = after.layout.paths[i];
    if (auto it = old_positions.find(path); it != old_positions.end()) {
      target.push_back(it->second);
      moving.push_back(after.layout.positions[i]);
      shared.push_back(path);
      seen[path] = true;
    } else {
      r.added.push_back(path);
    }
  }
  for (const auto& [path, p] : old_positions) {
    if (!seen.contains(path)) r.removed.push_back(path);
  }
  r.shared = shared.size();
  if (shared.empty()) return r;
  const Alignment a = procrustes_align(target, moving);
  double total = 0.0;
  for (std::size_t i = 0; i < shared.size(); ++i) {
    const double d = distance(target[i], a.aligned[i]);
    total += d;
    if (d > r.max_displacement || r.max_path.empty()) {
      r.max_displacement = d;
      r.max_path = shared[i];
    }
  }
  r.mean_displacement = total / static_cast<double>(shared.size());
  return r;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"codemap: spatial maps of source trees"};
  app.require_subcommand(1);

  BuildFlags build_flags;
  std::string build_root;
  std::optional<std::string> build_prev;
  std::string build_output = "codemap.json";
  bool no_grid = false;
  auto* build = app.add_subcommand("build", "build a map file from a source tree");
  build->add_option("root", build_root, "source tree")->required();
  build_flags.attach(*build);
  build->add_option("--prev", build_prev, "previous map file to warm-start from");
  build->add_option("-o,--output", build_output, "output map file ('-' for stdout)");
  build->add_flag("--no-grid", no_grid, "omit the elevation grid (rebuilt on load)");

  std::string render_input;
  std::string render_output = "codemap.svg";
  std::string render_layers = "landscape,contours,labels";
  std::size_t render_width = 1024;
  std::size_t render_labels = 64;
  auto* render = app.add_subcommand("render", "render a map file to SVG");
  render->add_option("mapfile", render_input, "map file")->required();
  render->add_option("-o,--output", render_output, "output SVG ('-' for stdout)");
  render->add_option("--layers", render_layers, "comma-separated visible layers");
  render->add_option("--width", render_width, "output size in pixels");
  render->add_option("--max-labels", render_labels, "label budget");

  std::string diff_old;
  std::string diff_new;
  double diff_threshold = 0.1;
  bool diff_json = false;
  auto* diff = app.add_subcommand("diff", "compare two map files for layout stability");
  diff->add_option("old", diff_old, "earlier map file")->required();
  diff->add_option("new", diff_new, "later map file")->required();
  diff->add_option("--threshold", diff_threshold, "maximum acceptable mean displacement");
  diff->add_flag("--json", diff_json, "machine-readable report");

  BuildFlags serve_flags;
  std::string serve_input;
  std::optional<int> serve_port;
  std::string serve_host = "127.0.0.1";
  std::optional<std::string> serve_static;
  auto* serve = app.add_subcommand("serve", "serve a map file or a freshly built source tree");
  serve->add_option("input", serve_input, "map file or source tree")->required();
  serve_flags.attach(*serve);
  serve->add_option("--port", serve_port, "listen port (default $CODEMAP_PORT or 8080)");
  serve->add_option("--host", serve_host, "listen address");
  serve->add_option("--static-dir", serve_static, "viewer assets served under /viewer/");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*build) return cmd_build(build_root, build_flags, build_prev, build_output, no_grid, out, err);
    if (*render) return cmd_render(render_input, render_output, render_layers, render_width, render_labels, out);
    if (*diff) return cmd_diff(diff_old, diff_new, diff_threshold, diff_json, out);
    if (*serve) return cmd_serve(serve_input, serve_flags, serve_port, serve_host, serve_static, out);
  } catch (const ConfigError& e) {
    err << "codemap: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "codemap: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace codemap::cli
