#include "mgb/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <istream>
#include <sstream>

#include "mgb/csv.hpp"
#include "mgb/gasket.hpp"

namespace mgb {

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : Error(line > 0 ? source + ":" + std::to_string(line) + ": " + what : source + ": " + what),
      source_(source),
      line_(line) {}

namespace {

enum Exp : unsigned {
  kGraphHeat = 1u << 0,
  kGraphBurgers = 1u << 1,
  kGasketApprox = 1u << 2,
  kHeatConv = 1u << 3,
  kBurgersConv = 1u << 4,
  kLemmaSuite = 1u << 5,
  kAll = 0x3f,
  kGraphRuns = kGraphHeat | kGraphBurgers,
  kConvRuns = kHeatConv | kBurgersConv,
};

unsigned experiment_bit(const std::string& name) {
  for (unsigned i = 0; i < std::size(kExperimentNames); ++i) {
    if (name == kExperimentNames[i]) return 1u << i;
  }
  return 0;
}

using Lookup = std::function<const std::string*(const std::string&)>;

struct KeySpec {
  const char* key;
  const char* section;
  unsigned experiments;
  // Default for the given experiment; may read keys that come earlier in the table.
  std::function<std::string(unsigned, const Lookup&)> fallback;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(const std::string& s, long long& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string constant(const char* v) { return v; }

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys = {
      {"experiment", "", kAll, nullptr},
      {"seed", "", kAll, [](unsigned, const Lookup&) { return constant("1"); }},
      {"threads", "", kAll, [](unsigned, const Lookup&) { return constant("1"); }},
      {"graph", "graph", kGraphRuns, [](unsigned, const Lookup&) { return constant("interval"); }},
      {"edge_length", "graph", kGraphRuns, [](unsigned, const Lookup&) { return constant("1"); }},
      {"cells_per_edge", "graph", kGraphRuns,
       [](unsigned, const Lookup&) { return constant("200"); }},
      {"mass", "graph", kGraphRuns, [](unsigned, const Lookup&) { return constant("consistent"); }},
      {"modes", "graph", kGraphRuns, [](unsigned, const Lookup&) { return constant("0"); }},
      {"initial", "initial", kGraphRuns, [](unsigned, const Lookup&) { return constant("cosine"); }},
      {"amplitude", "initial", kGraphRuns, [](unsigned, const Lookup&) { return constant("0.5"); }},
      {"mode", "initial", kGraphRuns, [](unsigned, const Lookup&) { return constant("1"); }},
      {"datum_level", "initial", kHeatConv, [](unsigned, const Lookup&) { return constant("1"); }},
      {"datum_values", "initial", kHeatConv,
       [](unsigned, const Lookup&) { return constant("1, 0.3, -0.5, 0.8, 0.1, 0.6"); }},
      {"datum_offset", "initial", kHeatConv, [](unsigned, const Lookup&) { return constant("2"); }},
      {"potential", "initial", kBurgersConv,
       [](unsigned, const Lookup&) { return constant("1, 0, 0"); }},
      {"times", "time", kGraphRuns | kConvRuns,
       [](unsigned exp, const Lookup&) {
         return (exp & kGraphRuns) ? constant("0, 0.025, 0.05, 0.075, 0.1") : constant("0.1, 0.5");
       }},
      {"m", "gasket", kGasketApprox | kConvRuns | kLemmaSuite,
       [](unsigned exp, const Lookup&) {
         if (exp & kGasketApprox) return constant("2");
         if (exp & kLemmaSuite) return constant("1, 2, 3");
         return constant("1, 2, 3, 4");
       }},
      {"reference_level", "gasket", kConvRuns,
       [](unsigned, const Lookup&) { return constant("6"); }},
      {"quadrature_level", "gasket", kGasketApprox | kConvRuns,
       [](unsigned exp, const Lookup& get) {
         long long v = 0;
         if (exp & kGasketApprox) {
           const std::string* m = get("m");
           return std::to_string((m && parse_int(*m, v) ? v : 2) + 4);
         }
         const std::string* ref = get("reference_level");
         return std::to_string((ref && parse_int(*ref, v) ? v : 6) + 2);
       }},
      {"weights", "gasket", kGasketApprox | kConvRuns | kLemmaSuite,
       [](unsigned, const Lookup&) { return constant("uniform"); }},
      {"test_level", "gasket", kBurgersConv, [](unsigned, const Lookup&) { return constant("1"); }},
      {"samples", "gasket", kLemmaSuite, [](unsigned, const Lookup&) { return constant("100"); }},
      {"sample_resolution", "gasket", kLemmaSuite,
       [](unsigned, const Lookup&) { return constant("4"); }},
      {"refinement", "gasket", kLemmaSuite, [](unsigned, const Lookup&) { return constant("2"); }},
  };
  return keys;
}

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : schema()) {
    if (key == k.key) return &k;
  }
  return nullptr;
}

const char* kSections[] = {"", "graph", "initial", "time", "gasket"};

std::string unknown_key_message(const std::string& key) {
  if (key == "viscosity" || key == "sigma" || key == "nu") {
    return "unknown key '" + key +
           "': the viscosity is fixed at sigma = 1 and cannot be configured";
  }
  return "unknown key '" + key + "'";
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(source, lineno, "malformed section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (std::find(std::begin(kSections) + 1, std::end(kSections), section) ==
          std::end(kSections)) {
        throw ConfigError(source, lineno, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(source, lineno, "expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError(source, lineno, "missing key before '='");
    cfg.assign(section, key, value, source, lineno);
  }
  cfg.finalize(source);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open configuration file");
  return parse(in, path.string());
}

void ExperimentConfig::assign(const std::string& section, const std::string& key,
                              const std::string& value, const std::string& source, int line) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw ConfigError(source, line, unknown_key_message(key));
  if (!section.empty() && section != spec->section) {
    throw ConfigError(source, line,
                      "key '" + key + "' belongs in " +
                          (*spec->section ? "[" + std::string(spec->section) + "]"
                                          : std::string("the top level")));
  }
  auto it = values_.find(key);
  if (it != values_.end() && !it->second.defaulted && it->second.source == source && line > 0) {
    throw ConfigError(source, line,
                      "duplicate key '" + key + "' (first set on line " +
                          std::to_string(it->second.line) + ")");
  }
  if (value.empty()) throw ConfigError(source, line, "empty value for '" + key + "'");
  values_[key] = Value{value, source, line, false};
}

void ExperimentConfig::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("command line", 0, "override '" + assignment + "' is not key=value");
  }
  const std::string key = trim(std::string_view(assignment).substr(0, eq));
  const std::string value = trim(std::string_view(assignment).substr(eq + 1));
  assign("", key, value, "command line", 0);
  finalize("command line");
}

void ExperimentConfig::finalize(const std::string& source) {
  for (auto it = values_.begin(); it != values_.end();) {
    it = it->second.defaulted ? values_.erase(it) : std::next(it);
  }

  auto ex = values_.find("experiment");
  if (ex == values_.end()) throw ConfigError(source, 0, "missing required key 'experiment'");
  const unsigned bit = experiment_bit(ex->second.text);
  if (!bit) {
    std::string names;
    for (const char* n : kExperimentNames) names += std::string(names.empty() ? "" : ", ") + n;
    throw ConfigError(ex->second.source, ex->second.line,
                      "unknown experiment '" + ex->second.text + "' (expected one of " + names +
                          ")");
  }
  experiment_ = ex->second.text;

  for (const auto& [key, v] : values_) {
    if (!(find_key(key)->experiments & bit)) {
      throw ConfigError(v.source, v.line,
                        "key '" + key + "' is not used by experiment '" + experiment_ + "'");
    }
  }

  const Lookup lookup = [this](const std::string& k) -> const std::string* {
    auto it = values_.find(k);
    return it == values_.end() ? nullptr : &it->second.text;
  };
  for (const auto& k : schema()) {
    if (!(k.experiments & bit) || values_.count(k.key) || !k.fallback) continue;
    values_[k.key] = Value{k.fallback(bit, lookup), "default", 0, true};
  }

  // Typed validation with the location of the offending entry.
  auto fail = [&](const std::string& key, const std::string& msg) {
    const Value& v = values_.at(key);
    throw ConfigError(v.source, v.line, "'" + key + "': " + msg);
  };
  auto int_in = [&](const std::string& key, long long lo, long long hi) {
    long long x = 0;
    if (!parse_int(values_.at(key).text, x)) fail(key, "expected an integer");
    if (x < lo || x > hi) {
      fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return x;
  };
  auto ints_in = [&](const std::string& key, long long lo, long long hi) {
    std::vector<long long> out;
    for (const auto& item : split_list(values_.at(key).text)) {
      long long x = 0;
      if (!parse_int(item, x)) fail(key, "expected a comma-separated list of integers");
      if (x < lo || x > hi) {
        fail(key, "entries must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
      if (!out.empty() && x <= out.back()) fail(key, "entries must be strictly ascending");
      out.push_back(x);
    }
    return out;
  };
  auto reals = [&](const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(values_.at(key).text)) {
      double x = 0;
      if (!parse_real(item, x)) fail(key, "expected a comma-separated list of numbers");
      out.push_back(x);
    }
    return out;
  };
  auto real = [&](const std::string& key) {
    double x = 0;
    if (!parse_real(values_.at(key).text, x)) fail(key, "expected a finite number");
    return x;
  };
  auto has_key = [&](const std::string& key) { return values_.count(key) > 0; };

  int_in("seed", 0, std::numeric_limits<long long>::max());
  int_in("threads", 1, 256);

  if (has_key("graph")) {
    const std::string& g = values_.at("graph").text;
    auto numbered = [&](const std::string& prefix) {
      if (g.rfind(prefix, 0) != 0) return false;
      long long n = 0;
      if (!parse_int(g.substr(prefix.size()), n) || n < 1 || n > 10000) {
        fail("graph", "'" + prefix + "N' needs 1 <= N <= 10000");
      }
      return true;
    };
    const bool builtin =
        g == "interval" || g == "triangle" || numbered("path:") || numbered("star:");
    if (!builtin && !std::filesystem::exists(g)) {
      fail("graph", "not a built-in graph (interval, triangle, path:N, star:N) or readable file");
    }
    if (!(real("edge_length") > 0.0)) fail("edge_length", "must be positive");
    int_in("cells_per_edge", 1, 100000);
    const std::string& mass = values_.at("mass").text;
    if (mass != "consistent" && mass != "lumped") fail("mass", "expected consistent or lumped");
    int_in("modes", 0, 100000000);
    const std::string& init = values_.at("initial").text;
    if (init != "cosine" && init != "constant") fail("initial", "expected cosine or constant");
    const double a = real("amplitude");
    if (init == "cosine" && !(std::abs(a) < 1.0)) {
      fail("amplitude", "|amplitude| < 1 keeps the heat datum 1 + a cos positive");
    }
    if (init == "constant" && !(a > 0.0)) fail("amplitude", "constant datum must be positive");
    int_in("mode", 1, 100000);
  }

  if (has_key("times")) {
    const auto ts = reals("times");
    if (ts.empty()) fail("times", "needs at least one time");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (ts[i] < 0.0) fail("times", "times must be nonnegative");
      if ((bit & kConvRuns) && !(ts[i] > 0.0)) fail("times", "times must be positive");
      if (i > 0 && !(ts[i] > ts[i - 1])) fail("times", "times must be strictly ascending");
    }
  }

  if (has_key("m")) {
    const auto ms = ints_in("m", (bit & kGasketApprox) ? 0 : 1, 7);
    if (ms.empty()) fail("m", "needs at least one level");
    if ((bit & kGasketApprox) && ms.size() != 1) fail("m", "gasket-approx takes a single level");
    if ((bit & kConvRuns) && ms.size() < 2) fail("m", "a rate fit needs at least two levels");
    if (has_key("reference_level")) {
      const long long ref = int_in("reference_level", 1, 8);
      if (ref <= ms.back()) fail("reference_level", "must exceed every level in m");
    }
    if (has_key("quadrature_level")) {
      const long long lo = has_key("reference_level") ? integer("reference_level") : ms.back();
      int_in("quadrature_level", lo, 10);
    }
    if (has_key("test_level")) {
      const long long tl = int_in("test_level", 0, 7);
      if (tl > ms.front()) fail("test_level", "must not exceed the coarsest level in m");
    }
  }

  if (has_key("weights")) {
    const std::string& w = values_.at("weights").text;
    if (w != "uniform") {
      const auto ws = reals("weights");
      if (ws.size() != 3) fail("weights", "expected 'uniform' or three numbers");
      double sum = 0.0;
      for (double x : ws) {
        if (!(x > 0.0)) fail("weights", "weights must be positive");
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-12) fail("weights", "weights must sum to 1");
    }
  }

  if (has_key("datum_level")) {
    const long long lvl = int_in("datum_level", 0, 6);
    const auto vals = reals("datum_values");
    if (vals.size() != gasket::vertex_count(static_cast<int>(lvl))) {
      fail("datum_values", "needs " + std::to_string(gasket::vertex_count(static_cast<int>(lvl))) +
                               " values (one per vertex of V_" + std::to_string(lvl) + ")");
    }
    real("datum_offset");
  }
  if (has_key("potential") && reals("potential").size() != 3) {
    fail("potential", "needs the three boundary values of a level-0 harmonic function");
  }
  if (has_key("samples")) int_in("samples", 1, 100000);
  if (has_key("sample_resolution")) int_in("sample_resolution", 1, 64);
  if (has_key("refinement")) int_in("refinement", 0, 3);
}

bool ExperimentConfig::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& ExperimentConfig::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::logic_error("configuration has no key '" + key + "'");
  return it->second.text;
}

double ExperimentConfig::number(const std::string& key) const {
  double x = 0.0;
  if (!parse_real(text(key), x)) throw std::logic_error("'" + key + "' is not a number");
  return x;
}

long long ExperimentConfig::integer(const std::string& key) const {
  long long x = 0;
  if (!parse_int(text(key), x)) throw std::logic_error("'" + key + "' is not an integer");
  return x;
}

std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(text(key))) {
    double x = 0.0;
    if (!parse_real(item, x)) throw std::logic_error("'" + key + "' is not a number list");
    out.push_back(x);
  }
  return out;
}

std::vector<long long> ExperimentConfig::integers(const std::string& key) const {
  std::vector<long long> out;
  for (const auto& item : split_list(text(key))) {
    long long x = 0;
    if (!parse_int(item, x)) throw std::logic_error("'" + key + "' is not an integer list");
    out.push_back(x);
  }
  return out;
}

std::string ExperimentConfig::render() const {
  std::ostringstream os;
  for (const char* section : kSections) {
    bool header = false;
    for (const auto& k : schema()) {
      if (std::string(k.section) != section) continue;
      auto it = values_.find(k.key);
      if (it == values_.end()) continue;
      if (!header && *section) {
        os << "\n[" << section << "]\n";
      }
      header = true;
      os << k.key << " = " << it->second.text << '\n';
    }
  }
  return os.str();
}

}  // namespace mgb
