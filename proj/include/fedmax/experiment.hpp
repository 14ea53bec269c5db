#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedmax/fed.hpp"

namespace fedmax {

enum class Algorithm { Npa, CodaPlus, Codasca };

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct PracticalParams {
  double eta0 = 0.1;
  long decay_every_t0 = 2000;
  double decay_factor = 3.0;
  int fixed_i = 1;
  long total_iters = 2000;
  double prox_coeff = 0.0;
  double eta_global = 1.0;
  int batch_m = 1;
};

struct TheoryParams {
  TheoryConstants constants;
  double eta0 = 0.1;        // decay-path initial step
  double eta_tilde = 0.01;  // control-variate effective step
  int i0 = 1;
  int stages = 1;
  int batch_m = 1;
};

struct DataSource {
  std::optional<SynthSpec> synthetic;
  std::optional<std::string> csv_path;
};

enum class PartitionKind { Homogeneous, Heterogeneous };
enum class ScheduleMode { Theory, Practical };
enum class CodascaOutput { RandomRound, Last };

// One experiment: data, partitioning, algorithm, schedule, evaluation.
// Parsed from / serialized to a JSON document; see README for the schema.
struct ExperimentConfig {
  Algorithm algorithm = Algorithm::Codasca;
  int k_clients = 1;
  PartitionKind partition = PartitionKind::Homogeneous;
  ScheduleMode schedule_mode = ScheduleMode::Practical;
  PracticalParams practical;
  TheoryParams theory;
  DataSource data;
  double test_fraction = 0.25;
  std::uint64_t seed = 0;
  long eval_every = 0;
  std::string output_path = "trace.csv";
  CodascaOutput codasca_output = CodascaOutput::RandomRound;
  ScorerKind scorer_kind = ScorerKind::Linear;
  int scorer_hidden = 4;  // Mlp1 only

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json_text() const;
};

struct RunResult {
  RunOutput output;
  double final_auc = 0.0;
  std::string algorithm;
};

// Runs one experiment in memory.
RunResult execute(const ExperimentConfig& config);

// Runs and writes the trace CSV to config.output_path plus a
// "<output_path>.summary.json" sibling. Throws on failure.
RunResult run_experiment(const ExperimentConfig& config);

struct SweepRow {
  std::string algorithm;
  int window = 1;
  std::uint64_t seed = 0;
  double final_auc = 0.0;
  long comm_rounds = 0;
};

// Cartesian sweep over algorithms x window sizes x seeds at a fixed
// iteration budget (practical schedules only). Writes one table CSV to
// base.output_path and returns the rows.
std::vector<SweepRow> run_sweep(const ExperimentConfig& base,
                                const std::vector<std::string>& algorithms,
                                const std::vector<int>& i_values,
                                const std::vector<std::uint64_t>& seeds);

// CLI-facing wrappers: report errors on stderr and return the process exit
// code (0 ok, 2 config, 3 divergence, 4 io, 1 other).
int run_experiment_cli(const std::string& config_path);
int run_sweep_cli(const std::string& config_path,
                  const std::vector<std::string>& algorithms,
                  const std::vector<int>& i_values,
                  const std::vector<std::uint64_t>& seeds);

}  // namespace fedmax
