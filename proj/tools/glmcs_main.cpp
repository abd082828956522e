// Command-line front end.
//
// Subcommands:
//   simulate            coverage/width experiment over Monte Carlo replications
//   width               same engine, emitting full set descriptors per row
//   regret              realized-regret vs bound audit
//   validate-martingale likelihood-ratio martingale checks (optionally shifted)
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure (the
// failing operation is named on stderr).

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "glmcs/glmcs.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> reps;
  std::optional<std::string> family;
  std::optional<int> d;
  std::optional<long> horizon;
  std::optional<double> delta;
  std::optional<std::string> set_filter;
  std::optional<double> eta;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "scenario config (JSON)")->required();
  cmd->add_option("--out", opt.out_path, "output CSV path (default: stdout)");
  cmd->add_option("--seed", opt.seed, "override the scenario seed");
  cmd->add_option("--reps", opt.reps, "override the replication count");
  cmd->add_option("--family", opt.family, "override the family");
  cmd->add_option("--d", opt.d, "override the dimension");
  cmd->add_option("--n", opt.horizon, "override the horizon");
  cmd->add_option("--delta", opt.delta, "override delta");
  cmd->add_option("--set", opt.set_filter, "evaluate only sets of this type");
  cmd->add_option("--eta", opt.eta, "shift parameter for validate-martingale");
}

glmcs::ScenarioConfig load_config(const CommonOptions& opt) {
  std::ifstream in(opt.config_path);
  if (!in) throw glmcs::ConfigError("config: cannot open '" + opt.config_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw glmcs::ConfigError(std::string("config: parse failure: ") + e.what());
  }
  glmcs::ScenarioConfig config = glmcs::ScenarioConfig::from_json(j);
  if (opt.seed) config.seed = *opt.seed;
  if (opt.reps) config.replications = *opt.reps;
  if (opt.family) config.family = *opt.family;
  if (opt.d) config.d = *opt.d;
  if (opt.horizon) {
    config.horizon = *opt.horizon;
    config.checkpoints.clear();  // stale checkpoints would fall outside the horizon
  }
  if (opt.delta) config.delta = *opt.delta;
  if (opt.eta) config.eta = *opt.eta;
  if (opt.set_filter) {
    std::vector<glmcs::SetSpec> kept;
    for (const auto& s : config.sets)
      if (s.type == *opt.set_filter) kept.push_back(s);
    config.sets = std::move(kept);
    if (config.sets.empty())
      throw glmcs::ConfigError("config: --set matched no configured set");
  }
  config.validate();
  return config;
}

void emit(const glmcs::CsvTable& table, const CommonOptions& opt) {
  if (opt.out_path.empty()) {
    table.write(std::cout);
    return;
  }
  std::ofstream out(opt.out_path, std::ios::binary);
  if (!out) throw glmcs::ConfigError("config: cannot open output '" + opt.out_path + "'");
  table.write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anytime-valid confidence sequences for generalized linear models"};
  app.require_subcommand(1);

  CommonOptions opt;
  CLI::App* simulate = app.add_subcommand("simulate", "coverage experiment");
  CLI::App* width = app.add_subcommand("width", "width experiment with set descriptors");
  CLI::App* regret = app.add_subcommand("regret", "regret-bound audit");
  CLI::App* validate =
      app.add_subcommand("validate-martingale", "martingale validity checks");
  for (CLI::App* cmd : {simulate, width, regret, validate}) add_common(cmd, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const glmcs::ScenarioConfig config = load_config(opt);
    if (simulate->parsed()) {
      emit(glmcs::coverage_experiment(config).table, opt);
    } else if (width->parsed()) {
      emit(glmcs::coverage_experiment(config, /*with_descriptors=*/true).table, opt);
    } else if (regret->parsed()) {
      emit(glmcs::regret_audit(config).table, opt);
    } else if (validate->parsed()) {
      emit(glmcs::shifted_martingale_validate(config, opt.eta.value_or(config.eta)).table,
           opt);
    }
  } catch (const glmcs::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
