#include "codemap/service.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include <httplib.h>

#include "codemap/config.hpp"
#include "codemap/error.hpp"
#include "codemap/serialize.hpp"

namespace codemap::service {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

Reply json_reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }

Reply error_reply(int status, std::string_view code, std::string_view message) {
  return json_reply(status, {{"error", code}, {"message", message}});
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<json> parse_body(const std::string& body) {
  try {
    json j = json::parse(body.empty() ? std::string("{}") : body);
    if (!j.is_object()) return std::nullopt;
    return j;
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
}

bool escapes_root(std::string_view path) {
  if (path.empty() || path.front() == '/' || path.front() == '\\') return true;
  if (path.find('\0') != std::string_view::npos || path.find('\\') != std::string_view::npos) return true;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto end = std::min(path.find('/', start), path.size());
    if (path.substr(start, end - start) == "..") return true;
    start = end + 1;
  }
  return false;
}

struct Subscriber {
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::string> queue;
  bool closed = false;
  std::optional<std::string> session;
};

struct Session {
  std::string id;
  std::string user;
  std::string color;
  std::size_t join_index = 0;
  std::vector<scene::Visit> visits;
  std::set<std::uint32_t> open;
  int streams = 0;
  Clock::time_point last_seen;
};

json placements(const MapModel& m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.corpus.size(); ++i) {
    const auto& doc = m.corpus.documents[i];
    out.push_back({{"id", doc.id},
                   {"path", doc.path},
                   {"x", m.layout.positions[i].x},
                   {"y", m.layout.positions[i].y},
                   {"size", doc.size},
                   {"kloc", doc.kloc},
                   {"language", doc.language}});
  }
  return out;
}

json layout_summary(const layout::Layout& l) {
  json full = serial::layout(l);
  full.erase("positions");
  full.erase("stress_history");
  return full;
}

json map_json(const Snapshot& snap, const scene::MapScene& scene) {
  return {{"schema", MapFile::kSchema},
          {"version", snap.version},
          {"root", snap.model->corpus.root.generic_string()},
          {"placements", placements(*snap.model)},
          {"layout", layout_summary(snap.model->layout)},
          {"scene", serial::scene(scene)}};
}

}  // namespace

scene::MapScene compose(const MapModel& model, std::size_t size, std::size_t max_labels) {
  scene::SceneInputs in;
  in.positions = model.layout.positions;
  in.corpus = &model.corpus;
  in.grid = &model.grid;
  in.terrain = model.settings.terrain;
  in.size = size;
  in.max_labels = max_labels;
  return scene::compose_scene(in);
}

struct MapService::State {
  ServiceOptions options;

  mutable std::mutex snapshot_mutex;
  std::shared_ptr<const Snapshot> current;
  std::mutex writer_mutex;

  mutable std::mutex sessions_mutex;
  std::map<std::string, Session> sessions;
  std::uint64_t next_session = 1;
  std::uint64_t visit_sequence = 0;

  std::mutex subscribers_mutex;
  std::vector<std::shared_ptr<Subscriber>> subscribers;

  httplib::Server server;
  std::thread server_thread;
  std::thread reaper_thread;
  std::mutex lifecycle_mutex;
  std::condition_variable reaper_cv;
  std::atomic<bool> running{false};
  std::atomic<bool> stopping{false};
  int port = 0;

  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard lock(snapshot_mutex);
    return current;
  }

  std::shared_ptr<const Snapshot> make_snapshot(std::shared_ptr<const MapModel> model, std::uint64_t version) const {
    auto snap = std::make_shared<Snapshot>();
    snap->version = version;
    snap->model = std::move(model);
    snap->scene = compose(*snap->model, options.scene_size, options.max_labels);
    snap->map_body = map_json(*snap, snap->scene).dump();
    return snap;
  }

  void publish(std::string_view event, json payload) {
    payload["version"] = snapshot()->version;
    const std::string frame = "event: " + std::string(event) + "\ndata: " + payload.dump() + "\n\n";
    std::lock_guard lock(subscribers_mutex);
    for (const auto& sub : subscribers) {
      {
        std::lock_guard sub_lock(sub->mutex);
        if (sub->closed) continue;
        sub->queue.push_back(frame);
      }
      sub->cv.notify_one();
    }
  }

  // Caller holds sessions_mutex.
  json presence_locked(const MapModel& model) const {
    std::vector<const Session*> ordered;
    for (const auto& [id, s] : sessions) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const Session* a, const Session* b) { return a->join_index < b->join_index; });
    json list = json::array();
    for (const Session* s : ordered) {
      json open = json::array();
      for (std::uint32_t doc : s->open) open.push_back(model.corpus.documents[doc].path);
      list.push_back({{"session_id", s->id}, {"user", s->user}, {"color", s->color}, {"open", std::move(open)}});
    }
    return {{"sessions", std::move(list)}};
  }

  json presence() const {
    const auto snap = snapshot();
    std::lock_guard lock(sessions_mutex);
    return presence_locked(*snap->model);
  }

  // Caller holds sessions_mutex.
  static std::vector<scene::Heat> heat_of(const Session& s) { return scene::heat_layer(s.visits); }

  static json heat_json(const MapModel& model, std::span<const scene::Heat> heat) {
    json out = json::array();
    for (const auto& h : heat) {
      out.push_back({{"path", model.corpus.documents[h.doc].path}, {"value", h.value}, {"rank", h.rank}});
    }
    return out;
  }

  std::shared_ptr<Subscriber> subscribe(const std::optional<std::string>& session) {
    auto sub = std::make_shared<Subscriber>();
    sub->session = session;
    if (session) {
      std::lock_guard lock(sessions_mutex);
      if (auto it = sessions.find(*session); it != sessions.end()) {
        ++it->second.streams;
        it->second.last_seen = Clock::now();
      }
    }
    json hello = presence();
    hello["version"] = snapshot()->version;
    sub->queue.push_back("event: hello\ndata: " + hello.dump() + "\n\n");
    std::lock_guard lock(subscribers_mutex);
    if (stopping) sub->closed = true;
    subscribers.push_back(sub);
    return sub;
  }

  void unsubscribe(const std::shared_ptr<Subscriber>& sub) {
    {
      std::lock_guard lock(subscribers_mutex);
      subscribers.erase(std::remove(subscribers.begin(), subscribers.end(), sub), subscribers.end());
    }
    if (sub->session) {
      std::lock_guard lock(sessions_mutex);
      if (auto it = sessions.find(*sub->session); it != sessions.end()) {
        --it->second.streams;
        it->second.last_seen = Clock::now();
      }
    }
  }

  void close_subscribers() {
    std::lock_guard lock(subscribers_mutex);
    for (const auto& sub : subscribers) {
      {
        std::lock_guard sub_lock(sub->mutex);
        sub->closed = true;
      }
      sub->cv.notify_all();
    }
  }
};

MapService::MapService(MapModel model, ServiceOptions options) : state_(std::make_unique<State>()) {
  if (options.scene_size == 0) throw ConfigError("scene size must be positive");
  state_->options = std::move(options);
  state_->current = state_->make_snapshot(std::make_shared<const MapModel>(std::move(model)), 1);
}

MapService::~MapService() { stop(); }

std::shared_ptr<const Snapshot> MapService::snapshot() const { return state_->snapshot(); }

Reply MapService::get_map(const std::optional<std::string>& session) const {
  const auto snap = state_->snapshot();
  if (!session) return {200, snap->map_body, "application/json"};

  scene::MapScene scene = snap->scene;
  const MapModel& model = *snap->model;
  std::vector<scene::Heat> heat;
  std::vector<scene::Marker> markers;
  {
    std::lock_guard lock(state_->sessions_mutex);
    const auto it = state_->sessions.find(*session);
    if (it == state_->sessions.end()) return error_reply(404, "unknown_session", "no such session: " + *session);
    heat = State::heat_of(it->second);
    std::vector<const Session*> ordered;
    for (const auto& [id, s] : state_->sessions) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const Session* a, const Session* b) { return a->join_index < b->join_index; });
    for (const Session* s : ordered) {
      for (std::uint32_t doc : s->open) markers.push_back({doc, model.layout.positions[doc], s->color, s->user});
    }
  }
  scene.layer(scene::LayerKind::Markers).payload = markers;
  scene.layer(scene::LayerKind::Heat).payload =
      scene::heat_spots(heat, model.layout.positions, model.sizes, model.settings.terrain);
  json body = map_json(*snap, scene);
  body["session"] = {{"session_id", *session}, {"heat", State::heat_json(model, heat)}};
  return json_reply(200, body);
}

Reply MapService::get_map_svg(const std::optional<std::string>& layers) const {
  const auto snap = state_->snapshot();
  scene::MapScene scene = snap->scene;
  std::vector<scene::LayerKind> visible{scene::LayerKind::Landscape, scene::LayerKind::Contours,
                                        scene::LayerKind::Labels};
  if (layers) {
    visible.clear();
    std::stringstream list(*layers);
    std::string name;
    while (std::getline(list, name, ',')) {
      name = trim(name);
      if (name.empty()) continue;
      const auto kind = scene::parse_layer(name);
      if (!kind) return error_reply(400, "unknown_layer", "unknown layer: " + name);
      visible.push_back(*kind);
    }
  }
  scene.set_visible(visible);
  return {200, scene::render_svg(scene), "image/svg+xml"};
}

Reply MapService::search(const std::string& raw_query) const {
  const std::string query = lower(trim(raw_query));
  if (query.empty()) return error_reply(400, "empty_query", "query parameter q must not be empty");
  const auto snap = state_->snapshot();
  const MapModel& model = *snap->model;
  std::map<std::uint32_t, double> scores;
  for (const auto& doc : model.corpus.documents) {
    double score = 0.0;
    if (const auto it = doc.tokens.find(query); it != doc.tokens.end()) score = it->second;
    if (lower(doc.path).find(query) != std::string::npos) score = std::max(score, 1.0);
    if (score > 0.0) scores.emplace(doc.id, score);
  }
  scene::Overlay overlay = scene::overlay_layer(scores, scene::Palette::Sequential, "search");
  scene::locate_overlay(overlay, model.layout.positions, model.sizes, model.settings.terrain);
  json overlay_json = serial::overlay(overlay);
  for (auto& entry : overlay_json["entries"]) {
    entry["path"] = model.corpus.documents[entry["doc"].get<std::uint32_t>()].path;
  }
  std::vector<std::pair<std::uint32_t, double>> ranked(scores.begin(), scores.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  json matches = json::array();
  for (const auto& [doc, score] : ranked) {
    matches.push_back({{"path", model.corpus.documents[doc].path}, {"score", score}});
  }
  return json_reply(200, {{"query", query},
                          {"count", scores.size()},
                          {"version", snap->version},
                          {"matches", std::move(matches)},
                          {"overlay", std::move(overlay_json)}});
}

Reply MapService::callers(const std::string& path) const {
  const auto snap = state_->snapshot();
  const MapModel& model = *snap->model;
  const auto id = model.corpus.find(path);
  if (!id) return error_reply(404, "unknown_path", "not in the corpus: " + path);
  const auto callers = model.graph.callers_of(*id);
  json body{{"path", path}, {"version", snap->version}, {"count", callers.size()}};
  json caller_paths = json::array();
  for (std::uint32_t c : callers) caller_paths.push_back(model.corpus.documents[c].path);
  body["callers"] = std::move(caller_paths);
  if (callers.empty()) {
    body["no_callers"] = true;
    body["tree"] = nullptr;
    return json_reply(200, body);
  }
  std::vector<Point> targets;
  for (std::uint32_t c : callers) targets.push_back(model.layout.positions[c]);
  body["no_callers"] = false;
  body["tree"] = serial::flow_tree(scene::flow_map(model.layout.positions[*id], targets));
  return json_reply(200, body);
}

Reply MapService::file(const std::string& path) const {
  if (escapes_root(path)) return error_reply(400, "rejected", "path must stay inside the corpus root");
  const auto snap = state_->snapshot();
  const MapModel& model = *snap->model;
  if (!model.corpus.find(path)) return error_reply(404, "unknown_path", "not in the corpus: " + path);
  if (model.corpus.root.empty()) return error_reply(404, "no_source", "map has no source tree");
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path root = fs::weakly_canonical(model.corpus.root, ec);
  const fs::path full = fs::weakly_canonical(model.corpus.root / path, ec);
  const auto rel = full.lexically_relative(root);
  if (ec || rel.empty() || *rel.begin() == "..") {
    return error_reply(400, "rejected", "path resolves outside the corpus root");
  }
  if (!fs::is_regular_file(full, ec)) {
    return error_reply(410, "stale_snapshot", "file no longer exists since the map was built: " + path);
  }
  std::ifstream in(full, std::ios::binary);
  if (!in) return error_reply(410, "stale_snapshot", "file can no longer be read: " + path);
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return {200, bytes.str(), "text/plain; charset=utf-8"};
}

Reply MapService::create_session(const std::string& body) {
  const auto j = parse_body(body);
  if (!j || !j->contains("user") || !(*j)["user"].is_string() || (*j)["user"].get<std::string>().empty()) {
    return error_reply(400, "bad_request", "expected {\"user\": name}");
  }
  json reply;
  {
    std::lock_guard lock(state_->sessions_mutex);
    Session s;
    s.join_index = state_->next_session++;
    s.id = "s" + std::to_string(s.join_index);
    s.user = (*j)["user"].get<std::string>();
    s.color = kSessionColors[(s.join_index - 1) % std::size(kSessionColors)];
    s.last_seen = Clock::now();
    reply = {{"session_id", s.id}, {"user", s.user}, {"color", s.color}};
    state_->sessions.emplace(s.id, std::move(s));
  }
  state_->publish("presence", state_->presence());
  reply["version"] = state_->snapshot()->version;
  return json_reply(201, reply);
}

Reply MapService::open_file(const std::string& session, const std::string& body) {
  const auto j = parse_body(body);
  if (!j || !j->contains("path") || !(*j)["path"].is_string()) {
    return error_reply(400, "bad_request", "expected {\"path\": file}");
  }
  const std::string path = (*j)["path"].get<std::string>();
  const auto snap = state_->snapshot();
  const MapModel& model = *snap->model;
  const auto id = model.corpus.find(path);
  json heat;
  {
    std::lock_guard lock(state_->sessions_mutex);
    const auto it = state_->sessions.find(session);
    if (it == state_->sessions.end()) return error_reply(404, "unknown_session", "no such session: " + session);
    if (!id) return error_reply(404, "unknown_path", "not in the corpus: " + path);
    Session& s = it->second;
    s.visits.push_back({*id, ++state_->visit_sequence});
    s.open.insert(*id);
    s.last_seen = Clock::now();
    heat = State::heat_json(model, State::heat_of(s));
  }
  state_->publish("presence", state_->presence());
  state_->publish("heat", {{"session_id", session}, {"heat", heat}});
  return json_reply(200, {{"ok", true}, {"version", snap->version}, {"heat", heat}});
}

Reply MapService::close_file(const std::string& session, const std::string& body) {
  const auto j = parse_body(body);
  if (!j || !j->contains("path") || !(*j)["path"].is_string()) {
    return error_reply(400, "bad_request", "expected {\"path\": file}");
  }
  const std::string path = (*j)["path"].get<std::string>();
  const auto snap = state_->snapshot();
  const auto id = snap->model->corpus.find(path);
  {
    std::lock_guard lock(state_->sessions_mutex);
    const auto it = state_->sessions.find(session);
    if (it == state_->sessions.end()) return error_reply(404, "unknown_session", "no such session: " + session);
    if (!id) return error_reply(404, "unknown_path", "not in the corpus: " + path);
    it->second.open.erase(*id);
    it->second.last_seen = Clock::now();
  }
  state_->publish("presence", state_->presence());
  return json_reply(200, {{"ok", true}, {"version", snap->version}});
}

Reply MapService::end_session(const std::string& session) {
  {
    std::lock_guard lock(state_->sessions_mutex);
    if (state_->sessions.erase(session) == 0) {
      return error_reply(404, "unknown_session", "no such session: " + session);
    }
  }
  state_->publish("presence", state_->presence());
  return json_reply(200, {{"ok", true}});
}

Reply MapService::post_anchors(const std::string& body) {
  json request;
  try {
    request = json::parse(body);
  } catch (const json::parse_error&) {
    return error_reply(400, "bad_request", "anchor request is not valid JSON");
  }
  std::lock_guard writer(state_->writer_mutex);
  const auto snap = state_->snapshot();
  double weight = snap->model->settings.layout.anchor_weight;
  std::vector<layout::AnchorSpec> anchors;
  try {
    anchors = config::parse_anchors(request, &weight);
  } catch (const ConfigError& e) {
    return error_reply(400, "invalid_anchors", e.what());
  }
  const auto& settings = snap->model->settings;
  if (anchors == settings.anchors && weight == settings.layout.anchor_weight) {
    return json_reply(200, {{"version", snap->version}, {"changed", false}, {"stress", snap->model->layout.stress}});
  }
  MapModel base = *snap->model;
  base.settings.layout.anchor_weight = weight;
  auto next = std::make_shared<const MapModel>(relayout(base, std::move(anchors)));
  auto published = state_->make_snapshot(std::move(next), snap->version + 1);
  {
    std::lock_guard lock(state_->snapshot_mutex);
    state_->current = published;
  }
  state_->publish("relayout", {{"stress", published->model->layout.stress}});
  return json_reply(200,
                    {{"version", published->version}, {"changed", true}, {"stress", published->model->layout.stress}});
}

void MapService::expire_sessions(Clock::time_point now) {
  json expired = json::array();
  {
    std::lock_guard lock(state_->sessions_mutex);
    for (auto it = state_->sessions.begin(); it != state_->sessions.end();) {
      if (it->second.streams == 0 && now - it->second.last_seen >= state_->options.presence_expiry) {
        expired.push_back(it->first);
        it = state_->sessions.erase(it);
      } else {
        ++it;
      }
    }
  }
  if (expired.empty()) return;
  json payload = state_->presence();
  payload["expired"] = std::move(expired);
  state_->publish("presence", std::move(payload));
}

namespace {

void send(httplib::Response& res, const Reply& reply) {
  res.status = reply.status;
  res.set_content(reply.body, reply.content_type);
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

}  // namespace

int MapService::start() {
  State& st = *state_;
  std::lock_guard lifecycle(st.lifecycle_mutex);
  if (st.running) return st.port;
  if (st.stopping) throw Error("service has been stopped");
  auto& svr = st.server;

  svr.new_task_queue = [] { return new httplib::ThreadPool(64); };
  // SO_REUSEADDR only, so a busy port fails to bind.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  svr.set_default_headers({{"Access-Control-Allow-Origin", st.options.allowed_origin}});
  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send(res, error_reply(500, "internal", what));
  });
  svr.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Max-Age", "600");
  });

  svr.Get("/", [this](const httplib::Request&, httplib::Response& res) {
    send(res, json_reply(200, {{"service", "codemap"},
                               {"version", snapshot()->version},
                               {"endpoints",
                                {"GET /map", "GET /map.svg", "GET /search?q=", "GET /callers?path=",
                                 "GET /file?path=", "GET /events", "POST /session", "POST /session/{id}/open",
                                 "POST /session/{id}/close", "DELETE /session/{id}", "POST /anchors"}}}));
  });
  svr.Get("/map", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, get_map(param(req, "session")));
  });
  svr.Get("/map.svg", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, get_map_svg(param(req, "layers")));
  });
  svr.Get("/search", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, search(param(req, "q").value_or("")));
  });
  svr.Get("/callers", [this](const httplib::Request& req, httplib::Response& res) {
    const auto path = param(req, "path");
    send(res, path ? callers(*path) : error_reply(400, "bad_request", "path parameter required"));
  });
  svr.Get("/file", [this](const httplib::Request& req, httplib::Response& res) {
    const auto path = param(req, "path");
    send(res, path ? file(*path) : error_reply(400, "bad_request", "path parameter required"));
  });
  svr.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, create_session(req.body));
  });
  svr.Post(R"(/session/([^/]+)/open)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, open_file(req.matches[1], req.body));
  });
  svr.Post(R"(/session/([^/]+)/close)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, close_file(req.matches[1], req.body));
  });
  svr.Delete(R"(/session/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, end_session(req.matches[1]));
  });
  svr.Post("/anchors", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, post_anchors(req.body));
  });
  svr.Get("/events", [this, &st](const httplib::Request& req, httplib::Response& res) {
    const auto session = param(req, "session");
    if (session) {
      std::lock_guard lock(st.sessions_mutex);
      if (!st.sessions.contains(*session)) {
        send(res, error_reply(404, "unknown_session", "no such session: " + *session));
        return;
      }
    }
    auto sub = st.subscribe(session);
    res.set_header("Cache-Control", "no-cache");
    res.set_header("X-Accel-Buffering", "no");
    const auto keepalive = st.options.keepalive;
    res.set_chunked_content_provider(
        "text/event-stream",
        [sub, keepalive](std::size_t, httplib::DataSink& sink) {
          std::unique_lock lock(sub->mutex);
          sub->cv.wait_for(lock, keepalive, [&] { return sub->closed || !sub->queue.empty(); });
          if (sub->closed) {
            lock.unlock();
            sink.done();
            return true;
          }
          std::string chunk;
          if (sub->queue.empty()) {
            chunk = ": keep-alive\n\n";
          } else {
            while (!sub->queue.empty()) {
              chunk += sub->queue.front();
              sub->queue.pop_front();
            }
          }
          lock.unlock();
          return sink.write(chunk.data(), chunk.size());
        },
        [&st, sub](bool) { st.unsubscribe(sub); });
  });
  if (st.options.static_dir && std::filesystem::is_directory(*st.options.static_dir)) {
    svr.set_mount_point("/viewer", st.options.static_dir->string());
  }

  if (st.options.port == 0) {
    st.port = svr.bind_to_any_port(st.options.host);
    if (st.port < 0) throw IoError("cannot bind a port on " + st.options.host);
  } else {
    if (!svr.bind_to_port(st.options.host, st.options.port)) {
      throw IoError("cannot bind " + st.options.host + ":" + std::to_string(st.options.port) +
                    " (port in use?)");
    }
    st.port = st.options.port;
  }
  st.running = true;
  st.server_thread = std::thread([&svr] { svr.listen_after_bind(); });
  svr.wait_until_ready();
  const auto tick = std::clamp<std::chrono::milliseconds>(st.options.presence_expiry / 4,
                                                         std::chrono::milliseconds(10),
                                                         std::chrono::milliseconds(1000));
  st.reaper_thread = std::thread([this, &st, tick] {
    std::unique_lock lock(st.lifecycle_mutex);
    while (!st.stopping) {
      st.reaper_cv.wait_for(lock, tick, [&] { return st.stopping.load(); });
      if (st.stopping) break;
      lock.unlock();
      expire_sessions(Clock::now());
      lock.lock();
    }
  });
  return st.port;
}

void MapService::stop() {
  if (!state_) return;
  State& st = *state_;
  {
    std::lock_guard lifecycle(st.lifecycle_mutex);
    if (st.stopping) return;
    st.stopping = true;
  }
  st.reaper_cv.notify_all();
  st.close_subscribers();
  if (st.running) st.server.stop();
  if (st.server_thread.joinable()) st.server_thread.join();
  if (st.reaper_thread.joinable()) st.reaper_thread.join();
  st.running = false;
  std::lock_guard lock(st.sessions_mutex);
  st.sessions.clear();
}

bool MapService::running() const { return state_->running; }

int MapService::port() const { return state_->port; }

}  // namespace codemap::service
