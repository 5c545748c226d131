#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wwlab/runner.hpp"

namespace {

struct SubSpec {
  const char* name;
  const char* experiment;
  const char* blurb;
};

constexpr SubSpec kSubs[] = {
    {"case1-sweep", "case1_sweep", "unicast sum-SE baselines (MRT, WMMSE) over a noise sweep"},
    {"case2-unfold", "case2_unfold", "train unfolded PGD steps, compare schedules on held-out channels"},
    {"redunet", "redunet_demo", "rate-reduction layer cascade on a synthetic mixture"},
    {"crate-block", "crate_block", "sparse coding descent trace for one dictionary block"},
    {"ib-sweep", "ib_sweep", "information bottleneck sweep over beta"},
    {"horizon", "horizon_sweep", "worst-case step-size schedules over horizons"},
    {"bp", "bp_run", "sum-product marginals for a factor graph"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;

  struct Wired {
    CLI::App* cmd;
    const char* experiment;
    CLI::Option* seed_opt;
  };
  std::vector<Wired> wired;
  for (const SubSpec& sub : kSubs) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.blurb);
    cmd->add_option("--config", config_path, "JSON experiment config");
    CLI::Option* seed_opt = cmd->add_option("--seed", seed, "seed override");
    cmd->add_option("--out", out_dir, "output directory (default .)");
    cmd->add_option("--threads", threads, "ensemble worker count (output-invariant)")
        ->check(CLI::PositiveNumber);
    wired.push_back({cmd, sub.experiment, seed_opt});
  }

  CLI11_PARSE(app, argc, argv);

  const Wired* active = nullptr;
  for (const Wired& w : wired) {
    if (w.cmd->parsed()) active = &w;
  }
  if (!active) {
    std::cerr << "error: no subcommand\n";
    return 2;
  }

  try {
    wwlab::ExperimentConfig config;
    if (config_path.empty()) {
      config.experiment = active->experiment;
      config.output_path = config.experiment + ".csv";
    } else {
      config = wwlab::load_config_file(config_path);
      if (config.experiment != active->experiment) {
        throw std::invalid_argument("config experiment '" + config.experiment +
                                    "' does not match subcommand '" + active->experiment + "'");
      }
    }
    if (active->seed_opt->count() > 0) config.seed = seed;

    const wwlab::RunResult result = wwlab::run_config(config, out_dir, threads);
    std::cout << result.csv_path.string() << "\n" << result.manifest_path.string() << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
