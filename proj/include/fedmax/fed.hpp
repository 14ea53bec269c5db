#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fedmax/data_gen.hpp"
#include "fedmax/metrics.hpp"
#include "fedmax/models.hpp"
#include "fedmax/objective.hpp"
#include "fedmax/thread_pool.hpp"

namespace fedmax {

// Problem constants used by the theory-mode schedules: per-sample smoothness
// ell, smoothness big_l of the primal envelope, PL constant mu, strong
// concavity mu2, gradient variance sigma2, client-drift bound drift_d and
// initial objective gap delta0.
struct TheoryConstants {
  double ell = 1.0;
  double big_l = 1.0;
  double mu = 0.1;
  double mu2 = 0.5;
  double sigma2 = 1.0;
  double drift_d = 0.0;
  double delta0 = 1.0;

  void validate() const;
};

// Hyperparameters of one stage. The decay-style algorithms read
// (eta_local, window_i, iters_t, prox_coeff, batch_m); the control-variate
// path reads (eta_local, eta_global, window_i, rounds_r, prox_coeff).
// raw_iters / raw_window keep the pre-rounding schedule values so exact
// formula identities stay checkable.
struct Stage {
  double eta_local = 0.0;
  double eta_global = 1.0;
  int window_i = 1;
  long iters_t = 0;
  long rounds_r = 0;
  double prox_coeff = 0.0;
  int batch_m = 1;
  double raw_iters = 0.0;
  double raw_window = 0.0;
};

struct StageSchedule {
  std::vector<Stage> stages;
};

// Per-client correction state: c_v spans the primal block (w, a, b) packed
// as d+2 values, c_alpha corrects the dual update.
struct ControlVariate {
  DenseVector c_v;
  double c_alpha = 0.0;

  explicit ControlVariate(std::size_t dim_v = 0) : c_v(dim_v) {}
  void reset() {
    c_v.fill(0.0);
    c_alpha = 0.0;
  }
};

struct ClientState {
  PrimalDualPoint point;
  ControlVariate cv;
  int shard_ref = 0;
  PrimalDualPoint running_sums;  // iterate-averaging accumulator
};

// Communication accounting. A "round" is one aggregate-and-broadcast
// barrier; vectors_sent counts transmitted arrays (a scalar is one array of
// length 1); bytes assume 8-byte floats. Uploads and broadcasts both count
// once per client. The one-time broadcast of the global positive ratio at
// setup is counted in vectors/bytes but not as a round.
struct CommLedger {
  long rounds = 0;
  long vectors_sent = 0;
  long bytes_sent = 0;

  void record_sync_round(int clients, std::size_t dim_v);      // v and alpha
  void record_control_round(int clients, std::size_t dim_v);   // + c_v, c_alpha
  void record_setup_broadcast(int clients);                    // global p
};

// Invoked at every synchronization barrier with the freshly agreed point and
// the active stage subproblem context.
using SyncHook =
    std::function<void(int stage, long round_in_stage, long iters_in_stage,
                       const PrimalDualPoint& synced,
                       const ObjectiveContext& stage_ctx)>;

struct CodaPlusObserver {
  std::function<void(int stage, const PrimalDualPoint& start,
                     const PrimalDualPoint& prox_center)>
      on_stage_start;
  std::function<void(int stage, const PrimalDualPoint& output)> on_stage_end;
};

struct CodascaObserver {
  // Fired before the local steps of a round, with the broadcast point and
  // the control variates the round will use.
  std::function<void(int stage, long round, const PrimalDualPoint& round_start,
                     const ControlVariate& global_cv,
                     const std::vector<ClientState>& clients)>
      on_round_start;
  // Fired after aggregation and extrapolation; clients carry their updated
  // control variates and end-of-round local points.
  std::function<void(int stage, long round,
                     const std::vector<ClientState>& clients,
                     const ControlVariate& global_cv,
                     const PrimalDualPoint& extrapolated)>
      on_round_end;
  std::function<void(int stage, long selected_round,
                     const PrimalDualPoint& output)>
      on_stage_end;
};

struct InnerLoopArgs {
  const ScorerSpec* scorer = nullptr;
  const ObjectiveContext* base_ctx = nullptr;  // prox-free; stage adds it
  std::span<const ClientShard> shards;
  std::uint64_t root_seed = 0;
  ThreadPool* pool = nullptr;
};

// One stage of the periodic-averaging path: every client starts from
// `start`, runs iters_t prox-SGDA steps (averaging every window_i), and the
// across-time across-client iterate average is returned.
PrimalDualPoint coda_plus_inner(const InnerLoopArgs& args,
                                const PrimalDualPoint& start,
                                const Stage& stage, int stage_index,
                                CommLedger& ledger,
                                const SyncHook& on_sync = {});

// One communication round of the control-variate path: steps corrected
// local updates per client, control-variate refresh, aggregation of the
// end-of-round iterates, server extrapolation, broadcast.
struct CodascaRoundArgs {
  const ScorerSpec* scorer = nullptr;
  const ObjectiveContext* stage_ctx = nullptr;  // prox included
  std::span<const ClientShard> shards;
  std::uint64_t root_seed = 0;
  int stage_index = 1;
  long round_index = 1;
  double eta_local = 0.0;
  double eta_global = 1.0;
  int steps = 1;
  long iter_base = 0;  // iterations completed in the stage, for diagnostics
  ThreadPool* pool = nullptr;
};

void codasca_round(const CodascaRoundArgs& args, PrimalDualPoint& round_start,
                   std::vector<ClientState>& clients, ControlVariate& global_cv,
                   CommLedger& ledger);

struct FedRunConfig {
  ScorerSpec scorer;
  ObjectiveContext base_ctx;
  std::vector<ClientShard> shards;
  StageSchedule schedule;
  std::uint64_t root_seed = 0;
  int threads = 1;
  bool codasca_last_round = false;  // default: seeded random-round output
  std::optional<PrimalDualPoint> init;  // defaults to zeros
};

struct Evaluator {
  long eval_every = 0;  // 0: only the initial and final rows
  std::function<double(const PrimalDualPoint&)> train_objective;
  std::function<double(const PrimalDualPoint&)> test_auc;
  std::function<std::optional<double>(const PrimalDualPoint&,
                                      const ObjectiveContext& stage_ctx)>
      duality_gap;
};

struct RunOutput {
  RunTrace trace;
  CommLedger ledger;
  PrimalDualPoint final_point;
  long total_iters = 0;
  long total_samples = 0;
};

RunOutput run_coda_plus(const FedRunConfig& config, const Evaluator& ev,
                        const CodaPlusObserver* observer = nullptr);

// Naive parallel mode: communication every iteration, batch_m-sample local
// gradients. Stages must carry window_i == 1.
RunOutput run_npa(const FedRunConfig& config, const Evaluator& ev,
                  const CodaPlusObserver* observer = nullptr);

RunOutput run_codasca(const FedRunConfig& config, const Evaluator& ev,
                      const CodascaObserver* observer = nullptr);

// Stagewise schedules. eta decays geometrically, iterations grow to keep
// eta*T constant, and the window grows as 1/(K eta) (homogeneous) or
// 1/sqrt(K eta) (heterogeneous).
StageSchedule theory_schedule_coda_plus(const TheoryConstants& tc, double eta0,
                                        int k_clients, bool heterogeneous,
                                        int stages);

// Control-variate schedule: eta_g = sqrt(K), fixed per-stage round count
// R = 1000/(eta_tilde * mu2), geometrically growing window, and local step
// eta_l = eta_tilde / (eta_g * I_s) so eta_l * eta_g * I_s is constant.
StageSchedule theory_schedule_codasca(const TheoryConstants& tc,
                                      double eta_tilde, int i0, int k_clients,
                                      int stages);

// Step decay by decay_factor every decay_every_t0 iterations at a fixed
// communication window; one stage per decay segment.
StageSchedule practical_schedule(double eta0, long decay_every_t0,
                                 double decay_factor, int fixed_i,
                                 long total_iters, double prox_coeff,
                                 double eta_global = 1.0, int batch_m = 1);

}  // namespace fedmax
