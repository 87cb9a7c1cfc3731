#include "smc/io/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "smc/io/csv.hpp"

namespace smc::io {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"experiment", {"kind", "trials", "base_seed", "noise_sigma", "threads", "alphas"}},
      {"generator", {"n1", "n2", "rank", "ranks", "density_left", "density_right"}},
      {"sampling", {"zero_rates", "nonzero_rates"}},
      {"solver", {"max_iters", "primal_tol", "dual_tol", "admm_penalty", "adaptive_penalty"}},
      {"real", {"matrix", "rows_per_trial"}},
      {"output", {"results", "heatmap_ratio", "heatmap_alpha", "manifest"}},
  };
  return keys;
}

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  const std::string* raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.find(section);
    if (sec == tree_.not_found()) return nullptr;
    const auto it = sec->second.find(key);
    if (it == sec->second.not_found()) return nullptr;
    return &it->second.data();
  }

  template <typename Int>
  void integer(const std::string& section, const std::string& key, Int& out, long long min) const {
    const std::string* v = raw(section, key);
    if (!v) return;
    const std::string t = trimmed(*v);
    long long x = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
      throw ConfigError(section + "." + key, "expected an integer, got '" + t + "'");
    if (x < min) throw ConfigError(section + "." + key, "must be >= " + std::to_string(min));
    out = static_cast<Int>(x);
  }

  void seed(const std::string& section, const std::string& key, std::uint64_t& out) const {
    const std::string* v = raw(section, key);
    if (!v) return;
    const std::string t = trimmed(*v);
    std::uint64_t x = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
      throw ConfigError(section + "." + key, "expected an unsigned 64-bit integer, got '" + t + "'");
    out = x;
  }

  void real(const std::string& section, const std::string& key, double& out) const {
    const std::string* v = raw(section, key);
    if (!v) return;
    try {
      out = parse_double(trimmed(*v), ParseError::npos, ParseError::npos);
    } catch (const ParseError&) {
      throw ConfigError(section + "." + key, "expected a number, got '" + trimmed(*v) + "'");
    }
  }

  void boolean(const std::string& section, const std::string& key, bool& out) const {
    const std::string* v = raw(section, key);
    if (!v) return;
    const std::string t = trimmed(*v);
    if (t == "true") out = true;
    else if (t == "false") out = false;
    else throw ConfigError(section + "." + key, "expected true or false, got '" + t + "'");
  }

  void list(const std::string& section, const std::string& key, std::vector<double>& out) const {
    const std::string* v = raw(section, key);
    if (v) out = parse_list(*v, section + "." + key);
  }

  void text(const std::string& section, const std::string& key, std::string& out) const {
    const std::string* v = raw(section, key);
    if (v) out = trimmed(*v);
  }

 private:
  const pt::ptree& tree_;
};

std::vector<double> default_rates() {
  std::vector<double> rates;
  for (int k = 0; k <= 10; ++k) rates.push_back(k / 10.0);
  return rates;
}

/// '#' comments are accepted alongside the parser's native ';'.
std::string normalize_comments(std::istream& in) {
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') line[first] = ';';
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

std::vector<double> parse_list(const std::string& text, const std::string& key_path) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trimmed(item);
    try {
      values.push_back(parse_double(t, ParseError::npos, ParseError::npos));
    } catch (const ParseError&) {
      throw ConfigError(key_path, "list item '" + t + "' is not a number");
    }
  }
  if (values.empty()) throw ConfigError(key_path, "list is empty");
  return values;
}

BenchmarkConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream normalized(normalize_comments(in));
  try {
    pt::read_ini(normalized, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config: " + e.message(), e.line() > 0 ? e.line() - 1 : ParseError::npos);
  }

  for (const auto& [section, body] : tree) {
    const auto known = schema().find(section);
    if (known == schema().end() || body.empty())
      throw ConfigError(section, known == schema().end() ? "unknown section or top-level key" : "empty section");
    for (const auto& [key, value] : body)
      if (!known->second.count(key)) throw ConfigError(section + "." + key, "unknown key");
  }

  const Reader r(tree);
  BenchmarkConfig cfg;
  cfg.sweep.zero_rates = default_rates();
  cfg.sweep.nonzero_rates = default_rates();

  std::string kind = "synthetic";
  r.text("experiment", "kind", kind);
  if (kind == "synthetic") cfg.kind = ExperimentKind::Synthetic;
  else if (kind == "real") cfg.kind = ExperimentKind::Real;
  else throw ConfigError("experiment.kind", "expected synthetic or real, got '" + kind + "'");
  r.integer("experiment", "trials", cfg.sweep.trials, 1);
  r.seed("experiment", "base_seed", cfg.sweep.base_seed);
  r.real("experiment", "noise_sigma", cfg.sweep.noise_sigma);
  r.integer("experiment", "threads", cfg.sweep.threads, 0);
  r.list("experiment", "alphas", cfg.sweep.alphas);

  r.list("sampling", "zero_rates", cfg.sweep.zero_rates);
  r.list("sampling", "nonzero_rates", cfg.sweep.nonzero_rates);

  r.integer("solver", "max_iters", cfg.sweep.solver.max_iters, 1);
  r.real("solver", "primal_tol", cfg.sweep.solver.primal_tol);
  r.real("solver", "dual_tol", cfg.sweep.solver.dual_tol);
  r.real("solver", "admm_penalty", cfg.sweep.solver.admm_penalty);
  r.boolean("solver", "adaptive_penalty", cfg.sweep.solver.adaptive_penalty);

  r.text("output", "results", cfg.output.results);
  r.text("output", "heatmap_ratio", cfg.output.heatmap_ratio);
  r.text("output", "heatmap_alpha", cfg.output.heatmap_alpha);
  r.text("output", "manifest", cfg.output.manifest);

  if (cfg.kind == ExperimentKind::Synthetic) {
    if (tree.find("real") != tree.not_found()) throw ConfigError("real", "only valid when experiment.kind = real");
    r.integer("generator", "n1", cfg.generator.n1, 1);
    r.integer("generator", "n2", cfg.generator.n2, 1);
    r.real("generator", "density_left", cfg.generator.density_left);
    r.real("generator", "density_right", cfg.generator.density_right);
    if (r.raw("generator", "rank") && r.raw("generator", "ranks"))
      throw ConfigError("generator.ranks", "give either rank or ranks, not both");
    if (r.raw("generator", "rank")) {
      Index rank = 0;
      r.integer("generator", "rank", rank, 1);
      cfg.ranks = {rank};
    } else if (const std::string* v = r.raw("generator", "ranks")) {
      cfg.ranks.clear();
      for (double x : parse_list(*v, "generator.ranks")) {
        if (x < 1 || x != static_cast<double>(static_cast<Index>(x)))
          throw ConfigError("generator.ranks", "ranks must be positive integers");
        cfg.ranks.push_back(static_cast<Index>(x));
      }
    }
    for (Index rank : cfg.ranks) {
      GeneratorSpec g = cfg.generator;
      g.rank = rank;
      try {
        g.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("generator", e.what());
      }
    }
  } else {
    if (tree.find("generator") != tree.not_found())
      throw ConfigError("generator", "only valid when experiment.kind = synthetic");
    std::string matrix;
    r.text("real", "matrix", matrix);
    if (matrix.empty()) throw ConfigError("real.matrix", "required when experiment.kind = real");
    cfg.matrix = std::filesystem::path(matrix).is_absolute() ? std::filesystem::path(matrix) : base_dir / matrix;
    r.integer("real", "rows_per_trial", cfg.rows_per_trial, 0);
  }

  const auto check_rates = [](const std::vector<double>& rates, const std::string& key) {
    for (double x : rates)
      if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(key, "rates must lie in [0, 1]");
  };
  check_rates(cfg.sweep.zero_rates, "sampling.zero_rates");
  check_rates(cfg.sweep.nonzero_rates, "sampling.nonzero_rates");
  for (double a : cfg.sweep.alphas)
    if (!(a > 0.0)) throw ConfigError("experiment.alphas", "alphas must be positive");
  if (cfg.sweep.noise_sigma < 0.0) throw ConfigError("experiment.noise_sigma", "must be >= 0");
  try {
    cfg.sweep.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("solver", e.what());
  }
  try {
    cfg.sweep.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("experiment", e.what());
  }
  return cfg;
}

BenchmarkConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

}  // namespace smc::io
