// mgb: run metric-graph and gasket experiments from configuration files.
//
//   mgb run <config> [key=value ...] [--out DIR] [--seed N] [--threads N]
//   mgb validate <config> [key=value ...]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical assertion
// failure (failed check, positivity loss, lemma violation), 4 solver failure.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mgb/config.hpp"
#include "mgb/errors.hpp"
#include "mgb/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAssertion = 3;
constexpr int kExitSolver = 4;

mgb::ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  auto cfg = mgb::ExperimentConfig::load(path);
  for (const auto& o : overrides) cfg.set_override(o);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat and Burgers equations on metric graphs and the Sierpinski gasket"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "mgb-out";
  std::optional<unsigned long long> seed;
  std::optional<int> threads;

  auto* run = app.add_subcommand("run", "Run the configured experiment");
  run->add_option("config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("overrides", overrides, "key=value overrides");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--seed", seed, "Random seed (overrides the config)");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));

  auto* validate = app.add_subcommand("validate", "Check a configuration and print it with defaults");
  validate->add_option("config", config_path, "Configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("overrides", overrides, "key=value overrides");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    auto cfg = load(config_path, overrides);
    if (seed) cfg.set_override("seed=" + std::to_string(*seed));
    if (threads) cfg.set_override("threads=" + std::to_string(*threads));

    if (validate->parsed()) {
      std::cout << cfg.render();
      return 0;
    }

    const auto report = mgb::run_experiment(cfg, out_dir);
    for (const auto& [name, value] : report.summary) {
      std::cout << name << " = " << value << '\n';
    }
    for (const auto& c : report.checks) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  (" << c.detail << ")\n";
    }
    std::cout << "wrote " << report.files.size() << " files to " << out_dir << '\n';
    return report.passed() ? 0 : kExitAssertion;
  } catch (const mgb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mgb::GraphError& e) {
    std::cerr << "graph error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mgb::PositivityError& e) {
    std::cerr << "positivity failure: " << e.what() << '\n';
    return kExitAssertion;
  } catch (const mgb::AssertionFailure& e) {
    std::cerr << "assertion failure: " << e.what() << '\n';
    return kExitAssertion;
  } catch (const mgb::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
