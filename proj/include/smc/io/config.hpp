#pragma once

// Benchmark configuration: an INI-style document of typed key = value pairs
// grouped in sections. Lists are comma-separated. See docs/config.md.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "smc/errors.hpp"
#include "smc/harness.hpp"

namespace smc::io {

/// Schema violation; the message names the offending key path
/// (e.g. "generator.n1").
class ConfigError : public ParseError {
 public:
  ConfigError(const std::string& key_path, const std::string& what)
      : ParseError(key_path + ": " + what), key_path_(key_path) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

enum class ExperimentKind { Synthetic, Real };

struct OutputNames {
  std::string results = "results.csv";
  std::string heatmap_ratio = "heatmap_ratio.csv";
  std::string heatmap_alpha = "heatmap_alpha.csv";
  std::string manifest = "manifest.json";
};

struct BenchmarkConfig {
  ExperimentKind kind = ExperimentKind::Synthetic;
  SweepSpec sweep;
  GeneratorSpec generator;          // synthetic only; seed unused
  std::vector<Index> ranks{1, 2, 3, 5};  // synthetic only; one heatmap pair per rank
  std::filesystem::path matrix;     // real only; resolved against the config's directory
  Index rows_per_trial = 0;         // real only
  OutputNames output;
};

/// `base_dir` resolves relative paths inside the document.
BenchmarkConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
BenchmarkConfig load_config(const std::filesystem::path& path);

std::vector<double> parse_list(const std::string& text, const std::string& key_path);

}  // namespace smc::io
