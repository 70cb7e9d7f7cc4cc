#pragma once

// Source tree ingestion: documents, tf-idf term vectors, the file-level
// dependency graph and the per-document impact metric.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace codemap::analysis {

using TermCounts = std::map<std::string, std::uint32_t>;

struct SparseEntry {
  std::uint32_t column;
  double weight;
};
using SparseVector = std::vector<SparseEntry>;  // sorted by column

struct Document {
  std::uint32_t id = 0;
  std::string path;  // repo-relative, '/' separated
  TermCounts tokens;
  double kloc = 0.0;
  double size = 0.0;
  std::string language = "unknown";

  // Raw lexical facts kept for dependency extraction.
  std::vector<std::string> identifiers;   // sorted, unique, case preserved
  std::vector<std::string> import_specs;  // as written in the source

  std::uint64_t token_count() const;
  std::string primary_name() const;  // basename without extension
};

struct Corpus {
  std::filesystem::path root;
  std::vector<Document> documents;
  std::map<std::string, std::uint32_t> vocabulary;
  std::vector<std::string> terms;          // column -> term
  std::vector<double> idf;                 // indexed by vocabulary column
  std::vector<SparseVector> term_vectors;  // indexed by document id
  std::vector<std::string> warnings;

  std::size_t size() const { return documents.size(); }
  std::optional<std::uint32_t> find(std::string_view path) const;
};

enum class EdgeKind : std::uint8_t { Import, NameReference };

struct Edge {
  std::uint32_t src;
  std::uint32_t dst;
  EdgeKind kind;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct DependencyGraph {
  std::uint32_t n = 0;
  std::vector<Edge> edges;  // sorted by (src, dst), at most one per pair

  std::vector<std::uint32_t> in_degrees() const;
  std::vector<std::uint32_t> callers_of(std::uint32_t dst) const;
  // Undirected neighbour lists, sorted and deduplicated.
  std::vector<std::vector<std::uint32_t>> undirected_adjacency() const;
};

enum class SizeMetric { Kloc, Tokens, Fanin };

SizeMetric parse_size_metric(std::string_view name);
std::string_view to_string(SizeMetric metric);

struct IngestConfig {
  std::vector<std::string> extensions;  // empty accepts every file
  std::vector<std::string> exclude;     // glob patterns over relative paths
  std::optional<std::filesystem::path> stopwords_file;
  SizeMetric metric = SizeMetric::Kloc;

  static IngestConfig defaults();
};

// Built-in stop list: programming keywords plus English function words.
const std::vector<std::string>& default_stopwords();

class Tokenizer {
public:
  Tokenizer();
  explicit Tokenizer(std::vector<std::string> stopwords);

  TermCounts operator()(std::string_view text) const;
  bool is_stopword(std::string_view term) const;

private:
  std::vector<std::string> stopwords_;  // sorted
};

TermCounts tokenize(std::string_view text);

// Whole identifiers (runs of [A-Za-z0-9_] starting with a non-digit).
std::vector<std::string> raw_identifiers(std::string_view text);

// Import/include targets named in the text, one per matching line.
std::vector<std::string> import_specs(std::string_view text);

// '**' matches any number of path segments, '*' and '?' stay within one.
bool glob_match(std::string_view pattern, std::string_view path);

Corpus ingest(const std::filesystem::path& root, const IngestConfig& config);

// Builds a corpus from in-memory (path, text) pairs; same rules as ingest.
Corpus ingest_texts(std::vector<std::pair<std::string, std::string>> files,
                    const IngestConfig& config);

void build_term_vectors(Corpus& corpus);

DependencyGraph extract_dependencies(const Corpus& corpus);

std::vector<double> size_metric(Corpus& corpus, const DependencyGraph& graph,
                                SizeMetric metric);

}  // namespace codemap::analysis
