#pragma once

// HTTP service over a built map: scene retrieval, search, callers, sessions
// with heat and presence, anchor re-layout, file contents and a server-sent
// event stream.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "codemap/pipeline.hpp"
#include "codemap/scene.hpp"

namespace codemap::service {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::size_t scene_size = 1024;
  std::size_t max_labels = 64;
  std::chrono::milliseconds presence_expiry{60'000};
  std::chrono::milliseconds keepalive{15'000};
  std::string allowed_origin = "*";
  std::optional<std::filesystem::path> static_dir;  // viewer assets served under /viewer
};

// Fixed palette handed out to sessions in join order.
inline constexpr const char* kSessionColors[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3",
                                                 "#ff7f00", "#a65628", "#f781bf", "#999999"};

// One published version of the map. Never modified after publication.
struct Snapshot {
  std::uint64_t version = 0;
  std::shared_ptr<const MapModel> model;
  scene::MapScene scene;
  std::string map_body;  // GET /map without a session
};

// A handler's answer, independent of the HTTP library.
struct Reply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class MapService {
public:
  MapService(MapModel model, ServiceOptions options);
  ~MapService();
  MapService(const MapService&) = delete;
  MapService& operator=(const MapService&) = delete;

  std::shared_ptr<const Snapshot> snapshot() const;

  // Endpoint logic, callable without a socket. Query and body arguments are
  // the raw request values.
  Reply get_map(const std::optional<std::string>& session) const;
  Reply get_map_svg(const std::optional<std::string>& layers) const;
  Reply search(const std::string& query) const;
  Reply callers(const std::string& path) const;
  Reply file(const std::string& path) const;
  Reply create_session(const std::string& body);
  Reply open_file(const std::string& session, const std::string& body);
  Reply close_file(const std::string& session, const std::string& body);
  Reply end_session(const std::string& session);
  Reply post_anchors(const std::string& body);

  // Binds and serves on a background thread. Throws IoError when the port
  // cannot be bound. Returns the bound port.
  int start();
  void stop();  // closes event streams and sessions; idempotent
  bool running() const;
  int port() const;

  // Drops sessions whose last event stream closed (or that were last seen)
  // longer ago than the expiry; called periodically while running.
  void expire_sessions(std::chrono::steady_clock::time_point now);

private:
  struct State;
  std::unique_ptr<State> state_;
};

// Scene for the given model as the service composes it.
scene::MapScene compose(const MapModel& model, std::size_t size, std::size_t max_labels);

}  // namespace codemap::service
