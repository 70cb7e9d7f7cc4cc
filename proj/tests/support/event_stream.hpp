#pragma once

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

namespace codemap::testing {

struct Event {
  std::string name;
  nlohmann::json data;
};

// Minimal event-stream reader running on its own thread.
class EventStream {
public:
  EventStream(int port, const std::string& path) : client_("127.0.0.1", port) {
    client_.set_read_timeout(5, 0);
    thread_ = std::thread([this, path] {
      client_.Get(path, [this](const char* data, std::size_t len) {
        std::lock_guard lock(mutex_);
        buffer_.append(data, len);
        for (auto end = buffer_.find("\n\n"); end != std::string::npos; end = buffer_.find("\n\n")) {
          parse(buffer_.substr(0, end));
          buffer_.erase(0, end + 2);
        }
        cv_.notify_all();
        return !done_;
      });
    });
  }

  ~EventStream() {
    {
      std::lock_guard lock(mutex_);
      done_ = true;
    }
    client_.stop();
    thread_.join();
  }

  std::optional<Event> next(const std::string& name, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    std::optional<Event> found;
    cv_.wait_for(lock, timeout, [&] {
      while (!events_.empty()) {
        Event e = std::move(events_.front());
        events_.pop_front();
        if (e.name == name) {
          found = std::move(e);
          return true;
        }
      }
      return false;
    });
    return found;
  }

  std::size_t keepalives() {
    std::lock_guard lock(mutex_);
    return keepalives_;
  }

private:
  void parse(const std::string& frame) {
    if (frame.starts_with(":")) {
      ++keepalives_;
      return;
    }
    Event e;
    std::istringstream lines(frame);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.starts_with("event: ")) e.name = line.substr(7);
      if (line.starts_with("data: ")) e.data = nlohmann::json::parse(line.substr(6));
    }
    events_.push_back(std::move(e));
  }

  httplib::Client client_;
  std::thread thread_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::string buffer_;
  std::deque<Event> events_;
  std::size_t keepalives_ = 0;
  bool done_ = false;
};

}  // namespace codemap::testing
