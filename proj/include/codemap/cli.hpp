#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "codemap/geometry.hpp"
#include "codemap/pipeline.hpp"

namespace codemap::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;  // operational failure or threshold breach
inline constexpr int kUsage = 2;

// Runs one command line (argv[0] is the program name).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct StabilityReport {
  std::size_t shared = 0;
  std::vector<std::string> added;
  std::vector<std::string> removed;
  double mean_displacement = 0.0;
  double max_displacement = 0.0;
  std::string max_path;
};

// Procrustes-aligns the new positions of shared documents onto the old ones.
StabilityReport compare(const MapFile& before, const MapFile& after);

}  // namespace codemap::cli
