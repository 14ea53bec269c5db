#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedmax/experiment.hpp"
#include "fedmax/kernels.hpp"
#include "fedmax/thread_pool.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fedmax: federated saddle-point AUC maximization simulator"};
  app.require_subcommand(1);

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config", run_config, "JSON config path")->required();

  std::string sweep_config;
  std::vector<int> i_values;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> algorithms;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "sweep communication windows and seeds at a fixed budget");
  sweep->add_option("config", sweep_config, "JSON config path")->required();
  sweep->add_option("--i", i_values, "window sizes, e.g. --i 1,32,64,128")
      ->required()
      ->delimiter(',');
  sweep->add_option("--seeds", seeds, "seeds, e.g. --seeds 0,1,2")
      ->required()
      ->delimiter(',');
  sweep->add_option("--algorithms", algorithms,
                    "override algorithms, e.g. --algorithms coda_plus,codasca")
      ->delimiter(',');

  CLI::App* info = app.add_subcommand("info", "print runtime configuration");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return fedmax::run_experiment_cli(run_config);
  if (sweep->parsed()) {
    return fedmax::run_sweep_cli(sweep_config, algorithms, i_values, seeds);
  }
  if (info->parsed()) {
    std::cout << "kernel backend: "
              << fedmax::kernels::backend_name(fedmax::kernels::active())
              << "\nworker threads: " << fedmax::ThreadPool::env_default()
              << '\n';
    return 0;
  }
  return 1;
}
