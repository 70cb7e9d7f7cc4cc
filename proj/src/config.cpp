#include "codemap/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "codemap/error.hpp"

namespace codemap::config {

using nlohmann::json;

namespace {

class TomlReader {
public:
  explicit TomlReader(std::string_view text) : text_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        ++pos_;
        skip_inline_space();
        std::vector<std::string> path{read_key()};
        skip_inline_space();
        while (peek() == '.') {
          ++pos_;
          skip_inline_space();
          path.push_back(read_key());
          skip_inline_space();
        }
        expect(']');
        table = &root;
        for (const auto& part : path) {
          json& next = (*table)[part];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) fail("'" + part + "' is not a table");
          table = &next;
        }
      } else {
        const std::string key = read_key();
        skip_inline_space();
        expect('=');
        skip_inline_space();
        if (table->contains(key)) fail("duplicate key '" + key + "'");
        (*table)[key] = read_value();
      }
      finish_line();
    }
    return root;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + what);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_inline_space() {
    while (peek() == ' ' || peek() == '\t') ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (true) {
      skip_inline_space();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() != '\n') return;
      ++pos_;
      ++line_;
    }
  }

  void finish_line() {
    skip_inline_space();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (at_end()) return;
    if (peek() != '\n') fail("unexpected text after value");
    ++pos_;
    ++line_;
  }

  std::string read_key() {
    if (peek() == '"' || peek() == '\'') return read_string();
    const std::size_t start = pos_;
    while (std::isalnum(static_cast<unsigned char>(peek())) != 0 || peek() == '_' || peek() == '-') ++pos_;
    if (start == pos_) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string read_string() {
    const char quote = peek();
    ++pos_;
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      char c = text_[pos_++];
      if (c == quote) break;
      if (c == '\\' && quote == '"') {
        if (at_end()) fail("unterminated string");
        c = text_[pos_++];
        switch (c) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '\\': out += '\\'; break;
          case '"': out += '"'; break;
          default: fail(std::string("unsupported escape \\") + c);
        }
        continue;
      }
      out += c;
    }
    return out;
  }

  // Whitespace, newlines and comments inside arrays.
  void skip_array_space() {
    while (true) {
      skip_inline_space();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() != '\n') return;
      ++pos_;
      ++line_;
    }
  }

  json read_value() {
    const char c = peek();
    if (c == '"' || c == '\'') return read_string();
    if (c == '[') {
      ++pos_;
      json arr = json::array();
      skip_array_space();
      while (peek() != ']') {
        arr.push_back(read_value());
        skip_array_space();
        if (peek() == ',') {
          ++pos_;
          skip_array_space();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      ++pos_;
      return arr;
    }
    const std::size_t start = pos_;
    while (!at_end() && peek() != ',' && peek() != ']' && peek() != '#' && peek() != '\n' && peek() != '\r' &&
           peek() != ' ' && peek() != '\t') {
      ++pos_;
    }
    std::string word(text_.substr(start, pos_ - start));
    if (word == "true") return true;
    if (word == "false") return false;
    std::string digits;
    for (char ch : word) {
      if (ch != '_') digits += ch;
    }
    if (digits.empty()) fail("expected a value");
    const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" ||
                          digits == "+inf" || digits == "-inf" || digits == "nan";
    std::size_t used = 0;
    try {
      if (is_float) {
        const double v = std::stod(digits, &used);
        if (used == digits.size()) return v;
      } else {
        const long long v = std::stoll(digits, &used, 10);
        if (used == digits.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("cannot parse value '" + word + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key + " must be finite");
  return d;
}

unsigned count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 1'000'000'000) {
    throw ConfigError(key + " must be a non-negative integer");
  }
  return static_cast<unsigned>(v.get<long long>());
}

std::vector<std::string> strings(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError(key + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ConfigError(key + " must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key + " must be a string");
  return v.get<std::string>();
}

void apply_key(const std::string& key, const json& v, BuildSettings& s, const std::filesystem::path& base) {
  if (key == "extensions") {
    s.ingest.extensions = strings(v, key);
  } else if (key == "exclude") {
    s.ingest.exclude = strings(v, key);
  } else if (key == "stopwords") {
    std::filesystem::path p = string(v, key);
    if (p.is_relative() && !base.empty()) p = base / p;
    s.ingest.stopwords_file = p;
  } else if (key == "metric") {
    s.ingest.metric = analysis::parse_size_metric(string(v, key));
  } else if (key == "alpha") {
    s.layout.alpha = number(v, key);
  } else if (key == "knn") {
    s.layout.knn = count(v, key);
  } else if (key == "max_iter") {
    s.layout.max_iter = count(v, key);
  } else if (key == "eps") {
    s.layout.eps = number(v, key);
  } else if (key == "seed") {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("seed must be a non-negative integer");
    s.layout.seed = v.get<std::uint64_t>();
  } else if (key == "anchor_weight") {
    s.layout.anchor_weight = number(v, key);
  } else if (key == "resolution") {
    s.resolution = count(v, key);
  } else if (key == "sigma_scale") {
    s.terrain.sigma_scale = number(v, key);
  } else if (key == "sigma_min") {
    s.terrain.sigma_min = number(v, key);
  } else if (key == "sigma_max") {
    s.terrain.sigma_max = number(v, key);
  } else if (key == "light_azimuth") {
    s.terrain.light_azimuth = number(v, key);
  } else if (key == "light_altitude") {
    s.terrain.light_altitude = number(v, key);
  } else if (key == "contour_levels") {
    s.terrain.contour_levels = count(v, key);
  } else if (key == "water_level") {
    s.terrain.water_level = number(v, key);
  } else if (key == "exaggeration") {
    s.terrain.exaggeration = number(v, key);
  } else if (key == "anchors") {
    double weight = s.layout.anchor_weight;
    s.anchors = parse_anchors(json{{"anchors", v}}, &weight);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

}  // namespace

json parse_toml(std::string_view text) { return TomlReader(text).parse(); }

json load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") {
    try {
      return json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + path.string() + ": " + e.what());
    }
  }
  return parse_toml(buf.str());
}

void apply(const json& config, BuildSettings& settings, const std::filesystem::path& base) {
  if (!config.is_object()) throw ConfigError("config must be a table of settings");
  for (const auto& [key, value] : config.items()) {
    if ((key == "ingest" || key == "layout" || key == "terrain") && value.is_object()) {
      for (const auto& [inner, v] : value.items()) apply_key(inner, v, settings, base);
    } else {
      apply_key(key, value, settings, base);
    }
  }
}

std::vector<layout::AnchorSpec> parse_anchors(const json& body, double* weight) {
  if (!body.is_object()) throw ConfigError("anchor request must be a JSON object");
  for (const auto& [key, value] : body.items()) {
    if (key != "anchors" && key != "weight") throw ConfigError("unknown anchor field: " + key);
  }
  if (body.contains("weight")) {
    const double w = number(body.at("weight"), "weight");
    if (!(w > 0.0)) throw ConfigError("anchor weight must be positive");
    if (weight != nullptr) *weight = w;
  }
  std::vector<layout::AnchorSpec> out;
  if (!body.contains("anchors")) return out;
  const json& anchors = body.at("anchors");
  if (!anchors.is_object()) throw ConfigError("anchors must map keys to [x, y]");
  for (const auto& [key, value] : anchors.items()) {
    if (key.empty()) throw ConfigError("anchor key must not be empty");
    layout::AnchorSpec spec;
    spec.key = key;
    const json* coords = &value;
    if (value.is_object()) {
      if (!value.contains("position")) throw ConfigError("anchor " + key + " has no position");
      coords = &value.at("position");
      if (value.contains("terms")) spec.terms = strings(value.at("terms"), "terms");
    }
    if (!coords->is_array() || coords->size() != 2) throw ConfigError("anchor " + key + " must be [x, y]");
    const double x = number((*coords)[0], "anchor " + key + " x");
    const double y = number((*coords)[1], "anchor " + key + " y");
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) {
      throw ConfigError("anchor " + key + " lies outside the unit square");
    }
    spec.position = {x, y};
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace codemap::config
