#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mgb/errors.hpp"

namespace mgb {

// Malformed, unknown or out-of-range configuration input. `line` is 0 for
// command-line overrides and for missing required keys.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

inline constexpr const char* kExperimentNames[] = {
    "graph-heat", "graph-burgers", "gasket-approx",
    "heat-convergence", "burgers-convergence", "lemma-suite",
};

/// Validated experiment configuration.
///
/// Plain text, one `key = value` per line, `#` comments, optional `[section]`
/// headers. Every key has a home section and may appear either before the
/// first header or under that section. Lists are comma separated. Keys that
/// the chosen experiment does not use are rejected.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(std::istream& in, const std::string& source = "<config>");
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Applies `key=value` from the command line and re-validates.
  void set_override(const std::string& assignment);

  const std::string& experiment() const { return experiment_; }
  bool has(const std::string& key) const;

  const std::string& text(const std::string& key) const;
  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<long long> integers(const std::string& key) const;

  /// The effective configuration (defaults filled in), in a form that
  /// parses back to the same configuration.
  std::string render() const;

 private:
  struct Value {
    std::string text;
    std::string source;
    int line = 0;
    bool defaulted = false;
  };

  void assign(const std::string& section, const std::string& key, const std::string& value,
              const std::string& source, int line);
  void finalize(const std::string& source);

  std::string experiment_;
  std::map<std::string, Value> values_;
};

}  // namespace mgb
