#include "swarmsense/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Options
{
  std::string config_path;
  std::string preset = "basic";
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string axis;
};

swarmsense::ExperimentConfig load(const Options& o)
{
  auto base = swarmsense::preset_config(o.preset);
  nlohmann::json overrides = nlohmann::json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in)
      throw swarmsense::ConfigError("--config",
                                    "cannot open " + o.config_path);
    try {
      overrides = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw swarmsense::ConfigError("--config", e.what());
    }
  }
  if (o.seed)
    overrides["seed"] = *o.seed;
  if (!o.out.empty())
    overrides["output"] = o.out;
  return swarmsense::merge_config(base, overrides);
}

void add_common(CLI::App* cmd, Options& o)
{
  cmd->add_option("--config", o.config_path, "JSON config overlaid on the preset")
    ->check(CLI::ExistingFile);
  cmd->add_option("--preset", o.preset, "Base configuration")
    ->check(CLI::IsMember({"basic", "desk", "traffic"}));
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--out", o.out, "Output directory");
}

int report(const swarmsense::RunSummary& summary)
{
  std::cout << (summary.complete ? "complete: " : "incomplete: ")
            << summary.directory.string() << '\n';
  return summary.complete ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Energy-aware sensing task assignment for drone swarms"};
  app.require_subcommand(1);

  Options o;
  auto* run = app.add_subcommand("run", "Run every method on every map");
  auto* exp = app.add_subcommand("export-plans", "Write generated plan sets");
  auto* stab = app.add_subcommand("stability", "Running mean of final RSS over maps");
  auto* sweep = app.add_subcommand("sweep", "Run over the values of one axis");
  for (auto* cmd : {run, exp, stab, sweep})
    add_common(cmd, o);
  sweep->add_option("--axis", o.axis, "dispatches, total_target, cells or stations")
    ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = load(o);
    if (*run)
      return report(swarmsense::run_experiment(config));
    if (*exp)
      return report(swarmsense::export_plans(config));
    if (*stab)
      return report(swarmsense::run_stability(config));
    if (!config.sweep || config.sweep->axis != o.axis)
      config.sweep = swarmsense::SweepConfig{
        o.axis, swarmsense::default_sweep_values(o.axis)};
    return report(swarmsense::run_experiment(config));
  } catch (const swarmsense::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
