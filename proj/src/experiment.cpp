#include "fedmax/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fedmax/errors.hpp"
#include "fedmax/rng.hpp"

namespace fedmax {

using nlohmann::json;

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON");
  return j;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T get_req(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw ConfigError(std::string("missing required config key '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

struct SplitData {
  std::vector<Sample> train;
  std::vector<int> train_clusters;  // empty when the source has none
  std::vector<Sample> test;
};

// Seeded stratified split: positives and negatives are shuffled and cut
// separately so the test positive ratio matches the training one.
SplitData stratified_split(std::vector<Sample> samples,
                           std::vector<int> clusters, double test_fraction,
                           std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0,
          "test_fraction must lie in (0,1)");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (samples[i].label == 1 ? pos : neg).push_back(i);
  }
  require(!pos.empty() && !neg.empty(),
          "dataset must contain both classes");

  auto shuffle = [&](std::vector<std::size_t>& idx, std::uint64_t which) {
    RngStream rng =
        derive_stream(seed, 0, rng_purpose::kTrainTestSplit, which, 0);
    for (std::size_t i = idx.size(); i > 1; --i) {
      const std::size_t j = rng.next_index(i);
      std::swap(idx[i - 1], idx[j]);
    }
  };
  shuffle(pos, 0);
  shuffle(neg, 1);

  const auto test_count = [&](std::size_t n) {
    return static_cast<std::size_t>(
        std::lround(test_fraction * static_cast<double>(n)));
  };
  const std::size_t pos_test = test_count(pos.size());
  const std::size_t neg_test = test_count(neg.size());
  require(pos_test >= 1 && neg_test >= 1,
          "test split would miss a class; increase data or test_fraction");
  require(pos_test < pos.size() && neg_test < neg.size(),
          "test split would exhaust a class");

  SplitData out;
  const bool with_clusters = !clusters.empty();
  auto emit = [&](std::size_t idx, bool to_test) {
    if (to_test) {
      out.test.push_back(std::move(samples[idx]));
    } else {
      out.train.push_back(std::move(samples[idx]));
      if (with_clusters) out.train_clusters.push_back(clusters[idx]);
    }
  };
  for (std::size_t i = 0; i < pos.size(); ++i) emit(pos[i], i < pos_test);
  for (std::size_t i = 0; i < neg.size(); ++i) emit(neg[i], i < neg_test);
  return out;
}

std::vector<double> score_all(const ScorerSpec& spec, const PrimalDualPoint& pt,
                              const std::vector<Sample>& data) {
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = score(spec, pt.w, data[i].x);
  }
  return out;
}

}  // namespace

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Npa: return "npa";
    case Algorithm::CodaPlus: return "coda_plus";
    case Algorithm::Codasca: return "codasca";
  }
  return "unknown";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "npa") return Algorithm::Npa;
  if (name == "coda_plus") return Algorithm::CodaPlus;
  if (name == "codasca") return Algorithm::Codasca;
  throw ConfigError("unknown algorithm '" + name +
                    "' (expected npa, coda_plus or codasca)");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const json j = parse_json(text);
  ExperimentConfig cfg;
  cfg.algorithm = algorithm_from_name(get_req<std::string>(j, "algorithm"));
  cfg.k_clients = get_req<int>(j, "k_clients");
  require(cfg.k_clients >= 1, "k_clients must be >= 1");

  const std::string part = get_or<std::string>(j, "partition", "homogeneous");
  if (part == "homogeneous") {
    cfg.partition = PartitionKind::Homogeneous;
  } else if (part == "heterogeneous") {
    cfg.partition = PartitionKind::Heterogeneous;
  } else {
    throw ConfigError("partition must be homogeneous or heterogeneous");
  }

  const std::string mode = get_req<std::string>(j, "schedule_mode");
  if (mode == "theory") {
    cfg.schedule_mode = ScheduleMode::Theory;
  } else if (mode == "practical") {
    cfg.schedule_mode = ScheduleMode::Practical;
  } else {
    throw ConfigError("schedule_mode must be theory or practical");
  }

  if (cfg.schedule_mode == ScheduleMode::Practical) {
    const json p = j.value("practical", json::object());
    cfg.practical.eta0 = get_req<double>(p, "eta0");
    cfg.practical.decay_every_t0 = get_or<long>(p, "decay_every_t0", 2000);
    cfg.practical.decay_factor = get_or<double>(p, "decay_factor", 3.0);
    cfg.practical.fixed_i = get_or<int>(p, "fixed_i", 1);
    cfg.practical.total_iters = get_req<long>(p, "total_iters");
    cfg.practical.prox_coeff = get_or<double>(p, "prox_coeff", 0.0);
    cfg.practical.eta_global = get_or<double>(p, "eta_global", 1.0);
    cfg.practical.batch_m = get_or<int>(p, "batch_m", 1);
  } else {
    const json t = j.value("theory", json::object());
    cfg.theory.constants.ell = get_req<double>(t, "ell");
    cfg.theory.constants.big_l = get_req<double>(t, "big_l");
    cfg.theory.constants.mu = get_req<double>(t, "mu");
    cfg.theory.constants.mu2 = get_req<double>(t, "mu2");
    cfg.theory.constants.sigma2 = get_or<double>(t, "sigma2", 1.0);
    cfg.theory.constants.drift_d = get_or<double>(t, "drift_d", 0.0);
    cfg.theory.constants.delta0 = get_or<double>(t, "delta0", 1.0);
    cfg.theory.eta0 = get_or<double>(t, "eta0", 0.1);
    cfg.theory.eta_tilde = get_or<double>(t, "eta_tilde", 0.01);
    cfg.theory.i0 = get_or<int>(t, "i0", 1);
    cfg.theory.stages = get_req<int>(t, "stages");
    cfg.theory.batch_m = get_or<int>(t, "batch_m", 1);
  }

  const json d = j.value("data", json::object());
  if (d.contains("synthetic")) {
    const json s = d.at("synthetic");
    SynthSpec spec;
    spec.n = get_req<long>(s, "n");
    spec.d = get_req<int>(s, "d");
    spec.imratio = get_req<double>(s, "imratio");
    spec.cluster_count = get_or<int>(s, "cluster_count", 1);
    spec.separation = get_or<double>(s, "separation", 1.0);
    spec.noise_sd = get_or<double>(s, "noise_sd", 1.0);
    cfg.data.synthetic = spec;
  } else if (d.contains("csv")) {
    cfg.data.csv_path = d.at("csv").get<std::string>();
  } else {
    throw ConfigError("data must name either a synthetic spec or a csv path");
  }

  cfg.test_fraction = get_or<double>(j, "test_fraction", 0.25);
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
  cfg.eval_every = get_or<long>(j, "eval_every", 0);
  cfg.output_path = get_or<std::string>(j, "output_path", "trace.csv");

  const std::string sel = get_or<std::string>(j, "codasca_output", "random_round");
  if (sel == "random_round") {
    cfg.codasca_output = CodascaOutput::RandomRound;
  } else if (sel == "last") {
    cfg.codasca_output = CodascaOutput::Last;
  } else {
    throw ConfigError("codasca_output must be random_round or last");
  }

  if (j.contains("scorer")) {
    const json s = j.at("scorer");
    const std::string kind = get_or<std::string>(s, "kind", "linear");
    if (kind == "linear") {
      cfg.scorer_kind = ScorerKind::Linear;
    } else if (kind == "mlp1") {
      cfg.scorer_kind = ScorerKind::Mlp1;
      cfg.scorer_hidden = get_or<int>(s, "hidden_dim", 4);
    } else {
      throw ConfigError("scorer.kind must be linear or mlp1");
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["algorithm"] = algorithm_name(algorithm);
  j["k_clients"] = k_clients;
  j["partition"] = partition == PartitionKind::Heterogeneous ? "heterogeneous"
                                                             : "homogeneous";
  j["schedule_mode"] =
      schedule_mode == ScheduleMode::Theory ? "theory" : "practical";
  if (schedule_mode == ScheduleMode::Practical) {
    j["practical"] = {{"eta0", practical.eta0},
                      {"decay_every_t0", practical.decay_every_t0},
                      {"decay_factor", practical.decay_factor},
                      {"fixed_i", practical.fixed_i},
                      {"total_iters", practical.total_iters},
                      {"prox_coeff", practical.prox_coeff},
                      {"eta_global", practical.eta_global},
                      {"batch_m", practical.batch_m}};
  } else {
    j["theory"] = {{"ell", theory.constants.ell},
                   {"big_l", theory.constants.big_l},
                   {"mu", theory.constants.mu},
                   {"mu2", theory.constants.mu2},
                   {"sigma2", theory.constants.sigma2},
                   {"drift_d", theory.constants.drift_d},
                   {"delta0", theory.constants.delta0},
                   {"eta0", theory.eta0},
                   {"eta_tilde", theory.eta_tilde},
                   {"i0", theory.i0},
                   {"stages", theory.stages},
                   {"batch_m", theory.batch_m}};
  }
  if (data.synthetic) {
    j["data"] = {{"synthetic",
                  {{"n", data.synthetic->n},
                   {"d", data.synthetic->d},
                   {"imratio", data.synthetic->imratio},
                   {"cluster_count", data.synthetic->cluster_count},
                   {"separation", data.synthetic->separation},
                   {"noise_sd", data.synthetic->noise_sd}}}};
  } else if (data.csv_path) {
    j["data"] = {{"csv", *data.csv_path}};
  }
  j["test_fraction"] = test_fraction;
  j["seed"] = seed;
  j["eval_every"] = eval_every;
  j["output_path"] = output_path;
  j["codasca_output"] =
      codasca_output == CodascaOutput::Last ? "last" : "random_round";
  if (scorer_kind == ScorerKind::Mlp1) {
    j["scorer"] = {{"kind", "mlp1"}, {"hidden_dim", scorer_hidden}};
  } else {
    j["scorer"] = {{"kind", "linear"}};
  }
  return j.dump(2);
}

RunResult execute(const ExperimentConfig& config) {
  std::vector<Sample> samples;
  std::vector<int> clusters;
  int feature_dim = 0;
  if (config.data.synthetic) {
    SynthData data = generate_synthetic(*config.data.synthetic, config.seed);
    samples = std::move(data.samples);
    clusters = std::move(data.cluster_of);
    feature_dim = config.data.synthetic->d;
  } else {
    samples = load_csv(*config.data.csv_path);
    require(!samples.empty(), "csv dataset is empty");
    feature_dim = static_cast<int>(samples[0].x.size());
  }

  SplitData split = stratified_split(std::move(samples), std::move(clusters),
                                     config.test_fraction, config.seed);

  std::vector<ClientShard> shards;
  if (config.partition == PartitionKind::Heterogeneous) {
    require(!split.train_clusters.empty(),
            "heterogeneous partitioning requires synthetic data with clusters");
    SynthData train_view;
    train_view.samples = std::move(split.train);
    train_view.cluster_of = std::move(split.train_clusters);
    shards = partition_heterogeneous(train_view, config.k_clients, config.seed);
    split.train = std::move(train_view.samples);
  } else {
    shards = partition_homogeneous(split.train, config.k_clients, config.seed);
  }

  long train_pos = 0;
  for (const Sample& s : split.train) train_pos += s.label == 1 ? 1 : 0;
  require(train_pos > 0 && train_pos < static_cast<long>(split.train.size()),
          "training data must contain both classes");
  const double p_global = static_cast<double>(train_pos) /
                          static_cast<double>(split.train.size());

  FedRunConfig run;
  run.scorer = config.scorer_kind == ScorerKind::Linear
                   ? ScorerSpec::linear(feature_dim)
                   : ScorerSpec::mlp1(feature_dim, config.scorer_hidden);
  run.base_ctx = ObjectiveContext::make(p_global);
  run.shards = std::move(shards);
  run.root_seed = config.seed;
  run.threads = ThreadPool::env_default();
  run.codasca_last_round = config.codasca_output == CodascaOutput::Last;

  const bool heterogeneous = config.partition == PartitionKind::Heterogeneous;
  switch (config.schedule_mode) {
    case ScheduleMode::Practical: {
      const PracticalParams& p = config.practical;
      const bool npa = config.algorithm == Algorithm::Npa;
      run.schedule = practical_schedule(
          p.eta0, p.decay_every_t0, p.decay_factor, npa ? 1 : p.fixed_i,
          p.total_iters, p.prox_coeff, p.eta_global, npa ? p.batch_m : 1);
      break;
    }
    case ScheduleMode::Theory: {
      const TheoryParams& t = config.theory;
      if (config.algorithm == Algorithm::Codasca) {
        run.schedule = theory_schedule_codasca(t.constants, t.eta_tilde, t.i0,
                                               config.k_clients, t.stages);
      } else {
        run.schedule = theory_schedule_coda_plus(
            t.constants, t.eta0, config.k_clients, heterogeneous, t.stages);
        if (config.algorithm == Algorithm::Npa) {
          for (Stage& st : run.schedule.stages) {
            st.window_i = 1;
            st.raw_window = 1.0;
            st.batch_m = t.batch_m;
          }
        }
      }
      break;
    }
  }

  const ScorerSpec spec = run.scorer;
  const ObjectiveContext base_ctx = run.base_ctx;
  const std::vector<Sample> train = std::move(split.train);
  const std::vector<Sample> test = std::move(split.test);
  std::vector<int> test_labels(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) test_labels[i] = test[i].label;

  Evaluator ev;
  ev.eval_every = config.eval_every;
  ev.train_objective = [&](const PrimalDualPoint& pt) {
    return full_objective(base_ctx, pt, train, score_all(spec, pt, train));
  };
  ev.test_auc = [&](const PrimalDualPoint& pt) {
    return empirical_auc(score_all(spec, pt, test), test_labels);
  };
  ev.duality_gap = [&](const PrimalDualPoint& pt,
                       const ObjectiveContext& stage_ctx)
      -> std::optional<double> {
    if (spec.kind != ScorerKind::Linear || !(stage_ctx.prox_coeff > 0.0)) {
      return std::nullopt;
    }
    return duality_gap_linear(spec, stage_ctx, pt, train);
  };

  RunResult result;
  switch (config.algorithm) {
    case Algorithm::Npa:
      result.output = run_npa(run, ev);
      break;
    case Algorithm::CodaPlus:
      result.output = run_coda_plus(run, ev);
      break;
    case Algorithm::Codasca:
      result.output = run_codasca(run, ev);
      break;
  }
  result.algorithm = algorithm_name(config.algorithm);
  result.final_auc = result.output.trace.rows.back().test_auc;
  return result;
}

RunResult run_experiment(const ExperimentConfig& config) {
  RunResult result = execute(config);

  const std::filesystem::path out_path(config.output_path);
  if (out_path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(out_path.parent_path(), ec);
  }
  {
    std::ofstream os(out_path);
    if (!os) throw IoError("cannot write trace to " + config.output_path);
    result.output.trace.write_csv(os);
  }

  const TraceRow& last = result.output.trace.rows.back();
  json summary;
  summary["algorithm"] = result.algorithm;
  summary["final_auc"] = result.final_auc;
  summary["final_train_objective"] = last.train_objective;
  if (last.duality_gap) summary["final_duality_gap"] = *last.duality_gap;
  summary["comm_rounds"] = result.output.ledger.rounds;
  summary["vectors_sent"] = result.output.ledger.vectors_sent;
  summary["bytes_sent"] = result.output.ledger.bytes_sent;
  summary["total_iters"] = result.output.total_iters;
  summary["total_samples"] = result.output.total_samples;
  summary["seed"] = config.seed;
  const std::string summary_path = config.output_path + ".summary.json";
  std::ofstream ss(summary_path);
  if (!ss) throw IoError("cannot write summary to " + summary_path);
  ss << summary.dump(2) << '\n';
  return result;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base,
                                const std::vector<std::string>& algorithms,
                                const std::vector<int>& i_values,
                                const std::vector<std::uint64_t>& seeds) {
  require(base.schedule_mode == ScheduleMode::Practical,
          "sweep requires a practical schedule");
  require(!i_values.empty(), "sweep needs at least one window value");
  require(!seeds.empty(), "sweep needs at least one seed");
  std::vector<std::string> algs = algorithms;
  if (algs.empty()) algs.push_back(algorithm_name(base.algorithm));
  for (const std::string& a : algs) {
    if (algorithm_from_name(a) == Algorithm::Npa) {
      throw ConfigError("sweep varies the window; use coda_plus or codasca");
    }
  }

  std::vector<SweepRow> rows;
  for (const std::string& alg : algs) {
    for (int window : i_values) {
      require(window >= 1, "window values must be >= 1");
      for (std::uint64_t seed : seeds) {
        ExperimentConfig cfg = base;
        cfg.algorithm = algorithm_from_name(alg);
        cfg.practical.fixed_i = window;
        cfg.seed = seed;
        RunResult res = execute(cfg);
        SweepRow row;
        row.algorithm = alg;
        row.window = window;
        row.seed = seed;
        row.final_auc = res.final_auc;
        row.comm_rounds = res.output.ledger.rounds;
        rows.push_back(std::move(row));
      }
    }
  }

  const std::filesystem::path out_path(base.output_path);
  if (out_path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(out_path.parent_path(), ec);
  }
  std::ofstream os(out_path);
  if (!os) throw IoError("cannot write sweep table to " + base.output_path);
  os << "algorithm,i,seed,final_auc,comm_rounds\n";
  for (const SweepRow& row : rows) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", row.final_auc);
    os << row.algorithm << ',' << row.window << ',' << row.seed << ',' << buf
       << ',' << row.comm_rounds << '\n';
  }
  return rows;
}

namespace {

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int run_experiment_cli(const std::string& config_path) {
  return guarded([&] {
    const ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
    const RunResult res = run_experiment(cfg);
    std::cout << "algorithm=" << res.algorithm
              << " final_auc=" << res.final_auc
              << " comm_rounds=" << res.output.ledger.rounds
              << " trace=" << cfg.output_path << '\n';
  });
}

int run_sweep_cli(const std::string& config_path,
                  const std::vector<std::string>& algorithms,
                  const std::vector<int>& i_values,
                  const std::vector<std::uint64_t>& seeds) {
  return guarded([&] {
    const ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
    const auto rows = run_sweep(cfg, algorithms, i_values, seeds);
    std::cout << "algorithm,i,seed,final_auc,comm_rounds\n";
    for (const SweepRow& row : rows) {
      std::cout << row.algorithm << ',' << row.window << ',' << row.seed << ','
                << row.final_auc << ',' << row.comm_rounds << '\n';
    }
  });
}

}  // namespace fedmax
