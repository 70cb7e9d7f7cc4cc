#include <doctest.h>

#include <httplib.h>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "codemap/cli.hpp"
#include "synthetic.hpp"

extern char** environ;

using namespace codemap;
using codemap::testing::TempDir;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result codemap_run(std::vector<std::string> args) {
  args.insert(args.begin(), "codemap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json without_timestamp(const std::filesystem::path& p) {
  json j = json::parse(slurp(p));
  j.erase("timestamp");
  return j;
}

struct Tree {
  TempDir dir{"cli"};
  std::filesystem::path src;

  explicit Tree(std::size_t files, std::uint64_t seed = 11) : src(dir.path() / "src-tree") {
    std::filesystem::create_directories(src);
    codemap::testing::write_tree(src, codemap::testing::synthetic_corpus(files, seed));
  }
  std::string at(const std::string& name) const { return (dir.path() / name).string(); }
};

// The installed binary running as a child process with stdout on a pipe.
class Child {
public:
  Child(const std::vector<std::string>& args, const std::vector<std::string>& extra_env = {}) {
    int fds[2];
    REQUIRE(pipe(fds) == 0);
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDERR_FILENO);
    posix_spawn_file_actions_addclose(&actions, fds[0]);
    std::vector<std::string> all{CODEMAP_EXE};
    all.insert(all.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : all) argv.push_back(a.data());
    argv.push_back(nullptr);
    std::vector<std::string> env_store;
    for (char** e = environ; *e != nullptr; ++e) {
      if (std::string_view(*e).starts_with("CODEMAP_PORT=")) continue;
      env_store.emplace_back(*e);
    }
    env_store.insert(env_store.end(), extra_env.begin(), extra_env.end());
    std::vector<char*> envp;
    for (auto& e : env_store) envp.push_back(e.data());
    envp.push_back(nullptr);
    REQUIRE(posix_spawn(&pid_, CODEMAP_EXE, &actions, nullptr, argv.data(), envp.data()) == 0);
    posix_spawn_file_actions_destroy(&actions);
    close(fds[1]);
    fd_ = fds[0];
  }

  ~Child() {
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
    close(fd_);
  }

  // Reads output until `needle` appears, the stream closes or the timeout passes.
  bool read_until(const std::string& needle, int timeout_ms = 30000) {
    while (output_.find(needle) == std::string::npos) {
      pollfd p{fd_, POLLIN, 0};
      if (poll(&p, 1, timeout_ms) <= 0) return false;
      char buf[4096];
      const ssize_t n = read(fd_, buf, sizeof(buf));
      if (n <= 0) return false;
      output_.append(buf, static_cast<std::size_t>(n));
    }
    return true;
  }

  int port() const {
    const auto at = output_.find("http://127.0.0.1:");
    return at == std::string::npos ? -1 : std::stoi(output_.substr(at + 17));
  }

  int signal_and_wait(int sig) {
    kill(pid_, sig);
    return wait();
  }

  int wait() {
    read_until("\x04");
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  const std::string& output() const { return output_; }

private:
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string output_;
};

}  // namespace

TEST_CASE("build is deterministic apart from the timestamp") {
  Tree t(20);
  REQUIRE(codemap_run({"build", t.src.string(), "-o", t.at("a.json"), "--resolution", "48"}).code == cli::kOk);
  REQUIRE(codemap_run({"build", t.src.string(), "-o", t.at("b.json"), "--resolution", "48"}).code == cli::kOk);
  CHECK(without_timestamp(t.at("a.json")) == without_timestamp(t.at("b.json")));
  const Result to_stdout = codemap_run({"build", t.src.string(), "-o", "-", "--resolution", "48"});
  CHECK(to_stdout.code == cli::kOk);
  json j = json::parse(to_stdout.out);
  j.erase("timestamp");
  CHECK(j == without_timestamp(t.at("a.json")));
}

TEST_CASE("build flag validation") {
  Tree t(5);
  const Result alpha = codemap_run({"build", t.src.string(), "--alpha", "1.5", "-o", t.at("x.json")});
  CHECK(alpha.code == cli::kUsage);
  CHECK(alpha.err.find("alpha") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(t.at("x.json")));
  CHECK(codemap_run({"build", t.src.string(), "--metric", "lines"}).code == cli::kUsage);
  CHECK(codemap_run({"build"}).code == cli::kUsage);
  CHECK(codemap_run({"frobnicate"}).code == cli::kUsage);
  CHECK(codemap_run({"build", t.at("missing"), "-o", t.at("y.json")}).code == cli::kFailure);
  CHECK(codemap_run({"--help"}).code == cli::kOk);
}

TEST_CASE("config file and flag precedence") {
  Tree t(8);
  std::ofstream(t.at("map.toml")) << "resolution = 40\n[layout]\nalpha = 0.3\n";
  REQUIRE(codemap_run({"build", t.src.string(), "--config", t.at("map.toml"), "--alpha", "0.6", "-o", t.at("c.json")})
              .code == cli::kOk);
  const MapFile f = load_mapfile(t.at("c.json"));
  CHECK(f.settings.resolution == 40);
  CHECK(f.settings.layout.alpha == 0.6);
}

TEST_CASE("warm start from an unchanged tree is a fixed point") {
  Tree t(20);
  REQUIRE(codemap_run({"build", t.src.string(), "-o", t.at("a.json"), "--resolution", "48"}).code == cli::kOk);
  REQUIRE(codemap_run({"build", t.src.string(), "--prev", t.at("a.json"), "-o", t.at("b.json")}).code == cli::kOk);
  const MapFile a = load_mapfile(t.at("a.json"));
  const MapFile b = load_mapfile(t.at("b.json"));
  CHECK(b.settings.resolution == 48);
  REQUIRE(a.layout.paths == b.layout.paths);
  for (std::size_t i = 0; i < a.layout.positions.size(); ++i) {
    CHECK(distance(a.layout.positions[i], b.layout.positions[i]) <= 1e-9);
  }
  const Result d = codemap_run({"diff", t.at("a.json"), t.at("b.json")});
  CHECK(d.code == cli::kOk);
  CHECK(d.out.find("stable") != std::string::npos);
}

TEST_CASE("render writes the requested layers") {
  Tree t(12);
  REQUIRE(codemap_run({"build", t.src.string(), "-o", t.at("m.json"), "--resolution", "48"}).code == cli::kOk);
  const Result svg = codemap_run({"render", t.at("m.json"), "-o", "-", "--width", "300", "--layers", "landscape"});
  REQUIRE(svg.code == cli::kOk);
  CHECK(svg.out.starts_with("<?xml"));
  CHECK(svg.out.find("width=\"300.00\"") != std::string::npos);
  CHECK(svg.out.find("<image") != std::string::npos);
  CHECK(svg.out.find("<text") == std::string::npos);

  REQUIRE(codemap_run({"render", t.at("m.json"), "-o", t.at("m.svg")}).code == cli::kOk);
  const std::string full = slurp(t.at("m.svg"));
  CHECK(full.find("<text") != std::string::npos);
  CHECK(full.find("<path") != std::string::npos);

  CHECK(codemap_run({"render", t.at("m.json"), "--width", "0"}).code == cli::kUsage);
  CHECK(codemap_run({"render", t.at("m.json"), "--layers", "sky"}).code == cli::kUsage);
  CHECK(codemap_run({"render", t.at("nope.json")}).code == cli::kFailure);
}

TEST_CASE("diff reports stability") {
  Tree t(15);
  REQUIRE(codemap_run({"build", t.src.string(), "-o", t.at("a.json"), "--resolution", "32"}).code == cli::kOk);
  const Result same = codemap_run({"diff", t.at("a.json"), t.at("a.json"), "--json"});
  CHECK(same.code == cli::kOk);
  const json report = json::parse(same.out);
  CHECK(report["shared"] == 15);
  CHECK(report["mean_displacement"].get<double>() <= 1e-12);

  TempDir other("cli-other");
  codemap::testing::write_tree(other.path(), {{"zz/Only.java", "class Only {}\n"}, {"zz/Two.java", "class Two {}\n"}});
  REQUIRE(codemap_run({"build", other.path().string(), "-o", t.at("z.json"), "--resolution", "32"}).code == cli::kOk);
  const Result disjoint = codemap_run({"diff", t.at("a.json"), t.at("z.json")});
  CHECK(disjoint.code == cli::kFailure);
  CHECK(disjoint.out.find("no shared documents") != std::string::npos);
}

TEST_CASE("compare aligns away rigid motions") {
  MapFile a;
  a.layout.paths = {"a", "b", "c", "d"};
  a.layout.positions = {{0.1, 0.1}, {0.9, 0.1}, {0.5, 0.8}, {0.3, 0.4}};
  MapFile b = a;
  for (Point& p : b.layout.positions) p = Point{1.0 - p.y, p.x};
  b.layout.paths.push_back("e");
  b.layout.positions.push_back({0.5, 0.5});
  const auto r = cli::compare(a, b);
  CHECK(r.shared == 4);
  CHECK(r.added == std::vector<std::string>{"e"});
  CHECK(r.mean_displacement <= 1e-9);
}

TEST_CASE("serve answers requests and exits cleanly on SIGINT") {
  Tree t(10);
  REQUIRE(codemap_run({"build", t.src.string(), "-o", t.at("m.json"), "--resolution", "32"}).code == cli::kOk);
  Child server({"serve", t.at("m.json"), "--port", "0", "--host", "127.0.0.1"});
  REQUIRE(server.read_until("viewer:"));
  const int port = server.port();
  REQUIRE(port > 0);

  httplib::Client c("127.0.0.1", port);
  const auto res = c.Get("/map");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["placements"].size() == 10);

  Child clash({"serve", t.at("m.json"), "--port", std::to_string(port), "--host", "127.0.0.1"});
  CHECK(clash.wait() == cli::kFailure);

  CHECK(server.signal_and_wait(SIGINT) == cli::kOk);
  CHECK(server.output().find("shutting down") != std::string::npos);
}

TEST_CASE("serve takes its port from the environment and builds trees directly") {
  Tree t(6);
  Child server({"serve", t.src.string(), "--host", "127.0.0.1", "--resolution", "32"}, {"CODEMAP_PORT=0"});
  REQUIRE(server.read_until("viewer:"));
  REQUIRE(server.port() > 0);
  httplib::Client c("127.0.0.1", server.port());
  const auto res = c.Get("/search?q=zzz");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(server.signal_and_wait(SIGTERM) == cli::kOk);

  Child bad({"serve", t.src.string()}, {"CODEMAP_PORT=http"});
  CHECK(bad.wait() == cli::kUsage);
}
