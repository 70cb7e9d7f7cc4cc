#include "codemap/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <system_error>

#include "codemap/error.hpp"

namespace codemap::analysis {
namespace fs = std::filesystem;

namespace {

bool is_ident_char(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_alpha(char c) { return is_upper(c) || is_lower(c); }

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Calls `emit` for every camelCase word of an all-letter run.
template <typename Emit>
void split_camel(std::string_view word, Emit&& emit) {
  std::size_t start = 0;
  for (std::size_t k = 1; k < word.size(); ++k) {
    const bool lower_to_upper = is_lower(word[k - 1]) && is_upper(word[k]);
    const bool acronym_end = is_upper(word[k - 1]) && is_upper(word[k]) && k + 1 < word.size() &&
                             is_lower(word[k + 1]);
    if (lower_to_upper || acronym_end) {
      emit(word.substr(start, k - start));
      start = k;
    }
  }
  emit(word.substr(start));
}

const std::map<std::string, std::string>& language_by_extension() {
  static const std::map<std::string, std::string> table = {
      {".c", "c"},          {".h", "c"},           {".cc", "cpp"},      {".cpp", "cpp"},
      {".cxx", "cpp"},      {".hh", "cpp"},        {".hpp", "cpp"},     {".hxx", "cpp"},
      {".java", "java"},    {".kt", "kotlin"},     {".scala", "scala"}, {".rs", "rust"},
      {".go", "go"},        {".py", "python"},     {".js", "javascript"},
      {".jsx", "javascript"}, {".ts", "typescript"}, {".tsx", "typescript"},
      {".cs", "csharp"},    {".rb", "ruby"},       {".swift", "swift"}, {".php", "php"},
      {".m", "objc"},       {".mm", "objc"},
  };
  return table;
}

std::string path_without_extension(std::string_view path) {
  const auto slash = path.rfind('/');
  const auto dot = path.rfind('.');
  if (dot == std::string_view::npos || (slash != std::string_view::npos && dot < slash) ||
      dot == (slash == std::string_view::npos ? 0 : slash + 1)) {
    return std::string(path);
  }
  return std::string(path.substr(0, dot));
}

std::string basename_of(std::string_view path) {
  const auto slash = path.rfind('/');
  return std::string(slash == std::string_view::npos ? path : path.substr(slash + 1));
}

std::uint64_t count_lines(std::string_view text) {
  return static_cast<std::uint64_t>(std::count(text.begin(), text.end(), '\n'));
}

Document make_document(std::string path, std::string_view text, const Tokenizer& tokenizer) {
  Document doc;
  doc.path = std::move(path);
  doc.tokens = tokenizer(text);
  doc.kloc = static_cast<double>(count_lines(text)) / 1000.0;
  doc.size = doc.kloc;
  const auto dot = doc.path.rfind('.');
  if (dot != std::string::npos) {
    const auto it = language_by_extension().find(doc.path.substr(dot));
    if (it != language_by_extension().end()) doc.language = it->second;
  }
  doc.identifiers = raw_identifiers(text);
  doc.import_specs = import_specs(text);
  return doc;
}

std::vector<std::string> read_stopwords(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read stopword file: " + file.string());
  std::vector<std::string> words;
  std::string word;
  while (in >> word) {
    if (!word.empty() && word.front() == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    words.push_back(to_lower(word));
  }
  return words;
}

Tokenizer tokenizer_for(const IngestConfig& config) {
  if (config.stopwords_file) return Tokenizer(read_stopwords(*config.stopwords_file));
  return Tokenizer();
}

bool accepted(const std::string& rel, const IngestConfig& config) {
  if (!config.extensions.empty()) {
    const bool ext_ok = std::any_of(config.extensions.begin(), config.extensions.end(),
                                    [&](const std::string& ext) {
                                      return rel.size() > ext.size() && rel.ends_with(ext);
                                    });
    if (!ext_ok) return false;
  }
  return std::none_of(config.exclude.begin(), config.exclude.end(),
                      [&](const std::string& pattern) { return glob_match(pattern, rel); });
}

Corpus assemble(std::vector<std::pair<std::string, std::string>> files, const IngestConfig& config,
                std::vector<std::string> warnings) {
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  files.erase(std::unique(files.begin(), files.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              files.end());
  const Tokenizer tokenizer = tokenizer_for(config);

  Corpus corpus;
  corpus.warnings = std::move(warnings);
  corpus.documents.resize(files.size());
  const auto count = static_cast<long>(files.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < count; ++i) {
    auto& [path, text] = files[static_cast<std::size_t>(i)];
    Document doc = make_document(path, text, tokenizer);
    doc.id = static_cast<std::uint32_t>(i);
    corpus.documents[static_cast<std::size_t>(i)] = std::move(doc);
  }
  build_term_vectors(corpus);
  return corpus;
}

bool glob_match_impl(std::string_view p, std::string_view s) {
  while (!p.empty()) {
    if (p.starts_with("**")) {
      std::string_view rest = p.substr(2);
      if (rest.starts_with('/') && glob_match_impl(rest.substr(1), s)) return true;
      for (std::size_t k = 0; k <= s.size(); ++k) {
        if (glob_match_impl(rest, s.substr(k))) return true;
      }
      return false;
    }
    if (p.front() == '*') {
      std::string_view rest = p.substr(1);
      for (std::size_t k = 0; k <= s.size(); ++k) {
        if (glob_match_impl(rest, s.substr(k))) return true;
        if (k < s.size() && s[k] == '/') break;
      }
      return false;
    }
    if (s.empty()) return false;
    if (p.front() == '?') {
      if (s.front() == '/') return false;
    } else if (p.front() != s.front()) {
      return false;
    }
    p.remove_prefix(1);
    s.remove_prefix(1);
  }
  return s.empty();
}

}  // namespace

std::uint64_t Document::token_count() const {
  std::uint64_t total = 0;
  for (const auto& [term, count] : tokens) total += count;
  return total;
}

std::string Document::primary_name() const {
  return path_without_extension(basename_of(path));
}

std::optional<std::uint32_t> Corpus::find(std::string_view path) const {
  const auto it = std::lower_bound(documents.begin(), documents.end(), path,
                                   [](const Document& d, std::string_view p) { return d.path < p; });
  if (it == documents.end() || it->path != path) return std::nullopt;
  return it->id;
}

std::vector<std::uint32_t> DependencyGraph::in_degrees() const {
  std::vector<std::uint32_t> degree(n, 0);
  for (const Edge& e : edges) ++degree[e.dst];
  return degree;
}

std::vector<std::uint32_t> DependencyGraph::callers_of(std::uint32_t dst) const {
  std::vector<std::uint32_t> out;
  for (const Edge& e : edges) {
    if (e.dst == dst) out.push_back(e.src);
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> DependencyGraph::undirected_adjacency() const {
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const Edge& e : edges) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

SizeMetric parse_size_metric(std::string_view name) {
  const std::string lower = to_lower(name);
  if (lower == "kloc") return SizeMetric::Kloc;
  if (lower == "tokens") return SizeMetric::Tokens;
  if (lower == "fanin") return SizeMetric::Fanin;
  throw ConfigError("unknown size metric '" + std::string(name) + "' (expected kloc, tokens or fanin)");
}

std::string_view to_string(SizeMetric metric) {
  switch (metric) {
    case SizeMetric::Kloc: return "kloc";
    case SizeMetric::Tokens: return "tokens";
    case SizeMetric::Fanin: return "fanin";
  }
  return "kloc";
}

IngestConfig IngestConfig::defaults() {
  IngestConfig config;
  for (const auto& [ext, lang] : language_by_extension()) config.extensions.push_back(ext);
  config.exclude = {"**/.git/**", "**/node_modules/**", "**/build/**"};
  return config;
}

const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> w = {
        // keywords
        "abstract", "auto", "bool", "break", "case", "catch", "char", "class", "const",
        "continue", "def", "do", "double", "else", "enum", "extends", "false", "final",
        "float", "fn", "for", "if", "implements", "import", "include", "int", "interface",
        "let", "long", "namespace", "new", "null", "nullptr", "package", "private",
        "protected", "public", "return", "self", "static", "struct", "super", "switch",
        "this", "throw", "true", "try", "using", "var", "void", "while",
        // English function words
        "an", "and", "are", "as", "at", "be", "by", "from", "in", "is", "it", "not", "of",
        "on", "that", "the", "to", "with"};
    std::sort(w.begin(), w.end());
    return w;
  }();
  return words;
}

Tokenizer::Tokenizer() : Tokenizer(default_stopwords()) {}

Tokenizer::Tokenizer(std::vector<std::string> stopwords) : stopwords_(std::move(stopwords)) {
  for (auto& w : stopwords_) w = to_lower(w);
  std::sort(stopwords_.begin(), stopwords_.end());
  stopwords_.erase(std::unique(stopwords_.begin(), stopwords_.end()), stopwords_.end());
}

bool Tokenizer::is_stopword(std::string_view term) const {
  return std::binary_search(stopwords_.begin(), stopwords_.end(), term);
}

TermCounts Tokenizer::operator()(std::string_view text) const {
  TermCounts counts;
  auto emit = [&](std::string_view word) {
    if (word.size() < 2) return;
    std::string term = to_lower(word);
    if (is_stopword(term)) return;
    ++counts[term];
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_alpha(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_alpha(text[j])) ++j;
    split_camel(text.substr(i, j - i), emit);
    i = j;
  }
  return counts;
}

TermCounts tokenize(std::string_view text) {
  static const Tokenizer tokenizer;
  return tokenizer(text);
}

std::vector<std::string> raw_identifiers(std::string_view text) {
  std::set<std::string> seen;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (!is_ident_char(c)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_ident_char(static_cast<unsigned char>(text[j]))) ++j;
    if (std::isdigit(c) == 0) seen.emplace(text.substr(i, j - i));
    i = j;
  }
  return {seen.begin(), seen.end()};
}

std::vector<std::string> import_specs(std::string_view text) {
  static const std::regex include_re(R"re(^\s*#\s*(?:include|import)\s*[<"]([^>"]+)[>"])re");
  static const std::regex java_re(R"re(^\s*import\s+(?:static\s+)?([A-Za-z_][\w.]*)(?:\.\*)?\s*;)re");
  static const std::regex python_from_re(R"re(^\s*from\s+([.\w]+)\s+import\b)re");
  static const std::regex python_import_re(R"re(^\s*import\s+([A-Za-z_][\w.]*)\s*(?:as\s+\w+\s*)?$)re");
  static const std::regex js_re(R"re((?:^\s*import\b[^'"]*|\brequire\s*\(\s*)['"]([^'"]+)['"])re");
  static const std::regex rust_re(R"re(^\s*(?:pub\s+)?use\s+([\w:]+))re");
  static const std::regex go_re(R"re(^\s*(?:import\s+)?(?:\w+\s+)?"([\w./-]+)"\s*$)re");

  std::vector<std::string> specs;
  std::istringstream lines{std::string(text)};
  std::string line;
  std::smatch m;
  bool in_go_block = false;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (in_go_block) {
      if (line.find(')') != std::string::npos) {
        in_go_block = false;
      } else if (std::regex_search(line, m, go_re)) {
        specs.push_back(m[1]);
      }
      continue;
    }
    if (std::regex_search(line, m, include_re) || std::regex_search(line, m, java_re) ||
        std::regex_search(line, m, python_from_re) || std::regex_search(line, m, js_re) ||
        std::regex_search(line, m, python_import_re) || std::regex_search(line, m, rust_re)) {
      specs.push_back(m[1]);
    } else if (line.starts_with("import (")) {
      in_go_block = true;
    } else if (line.starts_with("import \"") && std::regex_search(line, m, go_re)) {
      specs.push_back(m[1]);
    }
  }
  return specs;
}

bool glob_match(std::string_view pattern, std::string_view path) {
  return glob_match_impl(pattern, path);
}

Corpus ingest(const fs::path& root, const IngestConfig& config) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("cannot read source root: " + root.string());
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw IoError("cannot read source root: " + root.string() + ": " + ec.message());

  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::string> warnings;
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) {
      warnings.push_back("directory walk: " + ec.message());
      ec.clear();
      continue;
    }
    if (!it->is_regular_file(ec)) continue;
    const std::string rel = it->path().lexically_relative(root).generic_string();
    if (!accepted(rel, config)) continue;
    std::ifstream in(it->path(), std::ios::binary);
    std::ostringstream buffer;
    if (!in || !(buffer << in.rdbuf())) {
      // An empty file also fails the stream copy; only warn when it has bytes.
      if (in && fs::file_size(it->path(), ec) == 0 && !ec) {
        files.emplace_back(rel, std::string());
      } else {
        warnings.push_back("skipped unreadable file: " + rel);
      }
      continue;
    }
    files.emplace_back(rel, std::move(buffer).str());
  }
  Corpus corpus = assemble(std::move(files), config, std::move(warnings));
  corpus.root = fs::absolute(root).lexically_normal();
  return corpus;
}

Corpus ingest_texts(std::vector<std::pair<std::string, std::string>> files,
                    const IngestConfig& config) {
  std::erase_if(files, [&](const auto& f) { return !accepted(f.first, config); });
  return assemble(std::move(files), config, {});
}

void build_term_vectors(Corpus& corpus) {
  const std::size_t n = corpus.documents.size();
  std::map<std::string, std::uint32_t> df;
  for (const Document& doc : corpus.documents) {
    for (const auto& [term, count] : doc.tokens) ++df[term];
  }
  corpus.vocabulary.clear();
  corpus.terms.clear();
  corpus.idf.clear();
  for (const auto& [term, freq] : df) {
    corpus.vocabulary.emplace(term, static_cast<std::uint32_t>(corpus.terms.size()));
    corpus.terms.push_back(term);
    corpus.idf.push_back(std::log(static_cast<double>(n) / static_cast<double>(freq)));
  }

  corpus.term_vectors.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    const Document& doc = corpus.documents[i];
    SparseVector v;
    v.reserve(doc.tokens.size());
    double norm2 = 0.0;
    for (const auto& [term, count] : doc.tokens) {
      const std::uint32_t col = corpus.vocabulary.at(term);
      const double w = static_cast<double>(count) * corpus.idf[col];
      v.push_back({col, w});
      norm2 += w * w;
    }
    if (norm2 == 0.0 && !v.empty()) {
      // Every term is corpus-wide: fall back to raw frequencies so the
      // document still has a direction.
      for (auto& e : v) {
        e.weight = static_cast<double>(doc.tokens.at(corpus.terms[e.column]));
        norm2 += e.weight * e.weight;
      }
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& e : v) e.weight *= inv;
      std::erase_if(v, [](const SparseEntry& e) { return e.weight == 0.0; });
    }
    corpus.term_vectors[i] = std::move(v);
  }
}

namespace {

class ImportResolver {
public:
  explicit ImportResolver(const Corpus& corpus) : corpus_(corpus) {
    for (const Document& doc : corpus.documents) {
      by_stem_[path_without_extension(doc.path)].push_back(doc.id);
      by_path_[doc.path] = doc.id;
      by_basename_[basename_of(path_without_extension(doc.path))].push_back(doc.id);
    }
  }

  std::vector<std::uint32_t> resolve(const Document& from, const std::string& spec) const {
    std::vector<std::uint32_t> out;
    const bool path_like = spec.find('/') != std::string::npos || spec.starts_with('.') ||
                           spec.find('.') == std::string::npos ||
                           language_by_extension().contains(spec.substr(spec.rfind('.')));
    if (path_like && spec.find("::") == std::string::npos) {
      const fs::path dir = fs::path(from.path).parent_path();
      const std::string relative = (dir / spec).lexically_normal().generic_string();
      add_path_matches(relative, out);
      if (out.empty()) add_suffix_matches(fs::path(spec).lexically_normal().generic_string(), out);
    }
    if (out.empty()) {
      std::string stem = spec;
      for (std::size_t pos; (pos = stem.find("::")) != std::string::npos;) stem.replace(pos, 2, "/");
      std::replace(stem.begin(), stem.end(), '.', '/');
      while (!stem.empty() && (stem.back() == '/' || stem.back() == '*')) stem.pop_back();
      while (stem.starts_with('/')) stem.erase(0, 1);
      add_suffix_matches(stem, out);
      // `import a.b.Type.member` style: retry without the last segment.
      if (out.empty() && stem.find('/') != std::string::npos) {
        add_suffix_matches(stem.substr(0, stem.rfind('/')), out);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

private:
  void add_path_matches(const std::string& path, std::vector<std::uint32_t>& out) const {
    if (auto it = by_path_.find(path); it != by_path_.end()) out.push_back(it->second);
    if (auto it = by_stem_.find(path); it != by_stem_.end()) {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }

  // Documents whose path (with or without extension) ends with `tail` on a
  // segment boundary.
  void add_suffix_matches(const std::string& tail, std::vector<std::uint32_t>& out) const {
    if (tail.empty()) return;
    const std::string base = basename_of(path_without_extension(tail));
    const auto it = by_basename_.find(base);
    if (it == by_basename_.end()) return;
    for (std::uint32_t id : it->second) {
      const std::string& path = corpus_.documents[id].path;
      const std::string stem = path_without_extension(path);
      for (const std::string* candidate : {&path, &stem}) {
        if (*candidate == tail ||
            (candidate->size() > tail.size() && candidate->ends_with(tail) &&
             (*candidate)[candidate->size() - tail.size() - 1] == '/')) {
          out.push_back(id);
          break;
        }
      }
    }
  }

  const Corpus& corpus_;
  std::map<std::string, std::vector<std::uint32_t>> by_stem_;
  std::map<std::string, std::uint32_t> by_path_;
  std::map<std::string, std::vector<std::uint32_t>> by_basename_;
};

}  // namespace

DependencyGraph extract_dependencies(const Corpus& corpus) {
  DependencyGraph graph;
  graph.n = static_cast<std::uint32_t>(corpus.documents.size());

  std::unordered_map<std::string, std::vector<std::uint32_t>> by_name;
  for (const Document& doc : corpus.documents) by_name[doc.primary_name()].push_back(doc.id);
  const ImportResolver resolver(corpus);

  std::map<std::pair<std::uint32_t, std::uint32_t>, EdgeKind> found;
  for (const Document& doc : corpus.documents) {
    for (const std::string& spec : doc.import_specs) {
      for (std::uint32_t dst : resolver.resolve(doc, spec)) {
        if (dst != doc.id) found[{doc.id, dst}] = EdgeKind::Import;
      }
    }
    for (const std::string& ident : doc.identifiers) {
      const auto it = by_name.find(ident);
      if (it == by_name.end()) continue;
      for (std::uint32_t dst : it->second) {
        if (dst != doc.id) found.emplace(std::make_pair(doc.id, dst), EdgeKind::NameReference);
      }
    }
  }
  graph.edges.reserve(found.size());
  for (const auto& [key, kind] : found) graph.edges.push_back({key.first, key.second, kind});
  return graph;
}

std::vector<double> size_metric(Corpus& corpus, const DependencyGraph& graph, SizeMetric metric) {
  std::vector<double> sizes(corpus.documents.size(), 0.0);
  std::vector<std::uint32_t> in_degree;
  if (metric == SizeMetric::Fanin) {
    if (graph.n != corpus.documents.size()) {
      throw InputError("dependency graph does not match corpus size");
    }
    in_degree = graph.in_degrees();
  }
  for (Document& doc : corpus.documents) {
    switch (metric) {
      case SizeMetric::Kloc: doc.size = doc.kloc; break;
      case SizeMetric::Tokens: doc.size = static_cast<double>(doc.token_count()) / 1000.0; break;
      case SizeMetric::Fanin: doc.size = static_cast<double>(in_degree[doc.id]) + 1.0; break;
    }
    sizes[doc.id] = doc.size;
  }
  return sizes;
}

}  // namespace codemap::analysis
