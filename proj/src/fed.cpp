#include "fedmax/fed.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "fedmax/errors.hpp"
#include "fedmax/kernels.hpp"
#include "fedmax/rng.hpp"

namespace fedmax {

namespace {

void check_shards(std::span<const ClientShard> shards) {
  if (shards.empty()) throw ConfigError("at least one client shard required");
  for (const ClientShard& s : shards) {
    if (s.samples.empty()) throw EmptyDatasetError("client shard is empty");
  }
}

PrimalDualPoint zeros_like(const ScorerSpec& scorer) {
  return PrimalDualPoint(static_cast<std::size_t>(scorer.param_count()));
}

// Left-fold client average in ascending client order; the fixed reduction
// order makes results independent of the worker count.
PrimalDualPoint average_points(const std::vector<ClientState>& clients) {
  PrimalDualPoint acc = clients[0].point;
  for (std::size_t k = 1; k < clients.size(); ++k) {
    acc.w.add(clients[k].point.w);
    acc.a += clients[k].point.a;
    acc.b += clients[k].point.b;
    acc.alpha += clients[k].point.alpha;
  }
  const double inv = 1.0 / static_cast<double>(clients.size());
  acc.w.scale(inv);
  acc.a *= inv;
  acc.b *= inv;
  acc.alpha *= inv;
  return acc;
}

ObjectiveContext make_stage_ctx(const ObjectiveContext& base, double gamma,
                                const PrimalDualPoint& center) {
  return gamma > 0.0 ? base.with_prox(gamma, center) : base.without_prox();
}

class TraceBuilder {
 public:
  explicit TraceBuilder(const Evaluator& ev) : ev_(ev) {}

  void record(int stage, long round, long cum_iters, const CommLedger& ledger,
              const PrimalDualPoint& point, const ObjectiveContext& stage_ctx) {
    TraceRow row;
    row.stage = stage;
    row.round = round;
    row.cum_iters = cum_iters;
    row.cum_comm_rounds = ledger.rounds;
    row.train_objective = ev_.train_objective ? ev_.train_objective(point) : 0.0;
    row.test_auc = ev_.test_auc ? ev_.test_auc(point) : 0.0;
    if (ev_.duality_gap) row.duality_gap = ev_.duality_gap(point, stage_ctx);
    trace.rows.push_back(std::move(row));
  }

  void initial(const CommLedger& ledger, const PrimalDualPoint& point,
               const ObjectiveContext& stage_ctx) {
    record(0, 0, 0, ledger, point, stage_ctx);
    next_ = ev_.eval_every;
  }

  void maybe(int stage, long round, long cum_iters, const CommLedger& ledger,
             const PrimalDualPoint& point, const ObjectiveContext& stage_ctx) {
    if (ev_.eval_every <= 0 || cum_iters < next_) return;
    record(stage, round, cum_iters, ledger, point, stage_ctx);
    while (next_ <= cum_iters) next_ += ev_.eval_every;
  }

  RunTrace trace;

 private:
  const Evaluator& ev_;
  long next_ = 0;
};

void run_client_window(const InnerLoopArgs& args,
                       const ObjectiveContext& stage_ctx, ClientState& st,
                       int client, int stage_index, long from, long to,
                       double eta, int batch) {
  const ClientShard& shard = args.shards[static_cast<std::size_t>(st.shard_ref)];
  const std::size_t shard_n = shard.samples.size();
  const std::size_t dim = st.point.dim();
  GradV g;
  g.d_w = DenseVector(dim);
  GradV acc;
  acc.d_w = DenseVector(dim);
  DenseVector dh(dim);
  for (long step = from; step < to; ++step) {
    RngStream rng = derive_stream(args.root_seed,
                                  static_cast<std::uint64_t>(stage_index), 0,
                                  static_cast<std::uint64_t>(client),
                                  static_cast<std::uint64_t>(step));
    try {
      if (batch == 1) {
        const Sample& s = shard.samples[rng.next_index(shard_n)];
        const double h = score_and_grad(*args.scorer, st.point.w, s.x, dh);
        sample_grad_v_into(g, stage_ctx, st.point, s, h, dh);
        const double ga = sample_grad_alpha(stage_ctx, st.point, s, h);
        st.point.w.axpy(-eta, g.d_w);
        st.point.a -= eta * g.d_a;
        st.point.b -= eta * g.d_b;
        st.point.alpha += eta * ga;
      } else {
        acc.d_w.fill(0.0);
        acc.d_a = 0.0;
        acc.d_b = 0.0;
        double acc_alpha = 0.0;
        for (int draw = 0; draw < batch; ++draw) {
          const Sample& s = shard.samples[rng.next_index(shard_n)];
          const double h = score_and_grad(*args.scorer, st.point.w, s.x, dh);
          sample_grad_v_into(g, stage_ctx, st.point, s, h, dh);
          acc.d_w.add(g.d_w);
          acc.d_a += g.d_a;
          acc.d_b += g.d_b;
          acc_alpha += sample_grad_alpha(stage_ctx, st.point, s, h);
        }
        const double scale = eta / static_cast<double>(batch);
        st.point.w.axpy(-scale, acc.d_w);
        st.point.a -= scale * acc.d_a;
        st.point.b -= scale * acc.d_b;
        st.point.alpha += scale * acc_alpha;
      }
    } catch (const NumericalError&) {
      throw DivergenceError("non-finite iterate", stage_index, step);
    }
    // The window's last iterate joins the running average after averaging.
    if (step + 1 < to) {
      st.running_sums.w.add(st.point.w);
      st.running_sums.a += st.point.a;
      st.running_sums.b += st.point.b;
      st.running_sums.alpha += st.point.alpha;
    }
  }
}

}  // namespace

void TheoryConstants::validate() const {
  const struct {
    const char* name;
    double value;
  } positives[] = {{"ell", ell},       {"big_l", big_l},   {"mu", mu},
                   {"mu2", mu2},       {"sigma2", sigma2}, {"delta0", delta0}};
  for (const auto& item : positives) {
    if (!(item.value > 0.0)) {
      throw ConfigError(std::string("theory constant ") + item.name +
                        " must be > 0");
    }
  }
  if (drift_d < 0.0) throw ConfigError("drift_d must be >= 0");
  if (mu > big_l) throw ConfigError("mu must not exceed big_l");
}

void CommLedger::record_sync_round(int clients, std::size_t dim_v) {
  // per client, up and down: the primal block plus the dual scalar
  rounds += 1;
  vectors_sent += 4L * clients;
  bytes_sent += 8L * 2L * clients * static_cast<long>(dim_v + 1);
}

void CommLedger::record_control_round(int clients, std::size_t dim_v) {
  // sync payload plus the local/global control variates
  rounds += 1;
  vectors_sent += 8L * clients;
  bytes_sent += 8L * 2L * clients * static_cast<long>(2 * dim_v + 2);
}

void CommLedger::record_setup_broadcast(int clients) {
  vectors_sent += clients;
  bytes_sent += 8L * clients;
}

PrimalDualPoint coda_plus_inner(const InnerLoopArgs& args,
                                const PrimalDualPoint& start,
                                const Stage& stage, int stage_index,
                                CommLedger& ledger, const SyncHook& on_sync) {
  check_shards(args.shards);
  if (stage.iters_t < 1) throw ConfigError("stage iteration count must be >= 1");
  if (stage.window_i < 1) throw ConfigError("window_i must be >= 1");
  if (stage.batch_m < 1) throw ConfigError("batch_m must be >= 1");
  if (!(stage.eta_local >= 0.0)) throw ConfigError("step size must be >= 0");
  if (start.dim() != static_cast<std::size_t>(args.scorer->param_count())) {
    throw ShapeError("start point does not match scorer dimension");
  }

  const ObjectiveContext stage_ctx =
      make_stage_ctx(*args.base_ctx, stage.prox_coeff, start);
  const int k_clients = static_cast<int>(args.shards.size());
  const std::size_t dim_v = start.dim() + 2;

  std::vector<ClientState> clients(static_cast<std::size_t>(k_clients));
  for (int k = 0; k < k_clients; ++k) {
    ClientState& st = clients[static_cast<std::size_t>(k)];
    st.point = start;
    st.shard_ref = k;
    st.running_sums = PrimalDualPoint(start.dim());
  }

  long t = 0;
  long round_in_stage = 0;
  while (t < stage.iters_t) {
    const long window = std::min<long>(stage.window_i, stage.iters_t - t);
    auto body = [&](int k) {
      run_client_window(args, stage_ctx, clients[static_cast<std::size_t>(k)],
                        k, stage_index, t, t + window, stage.eta_local,
                        stage.batch_m);
    };
    if (args.pool) {
      args.pool->parallel_for(k_clients, body);
    } else {
      for (int k = 0; k < k_clients; ++k) body(k);
    }
    t += window;
    ++round_in_stage;

    PrimalDualPoint synced = average_points(clients);
    if (!synced.all_finite()) {
      throw DivergenceError("non-finite aggregate", stage_index, t);
    }
    for (ClientState& st : clients) {
      st.point = synced;
      st.running_sums.w.add(synced.w);
      st.running_sums.a += synced.a;
      st.running_sums.b += synced.b;
      st.running_sums.alpha += synced.alpha;
    }
    ledger.record_sync_round(k_clients, dim_v);
    if (on_sync) on_sync(stage_index, round_in_stage, t, synced, stage_ctx);
  }

  // Collect the across-time across-client average. With window 1 the final
  // iterate exchange above already carried the sums, so no extra round.
  PrimalDualPoint out(start.dim());
  for (const ClientState& st : clients) {
    out.w.add(st.running_sums.w);
    out.a += st.running_sums.a;
    out.b += st.running_sums.b;
    out.alpha += st.running_sums.alpha;
  }
  const double inv =
      1.0 / (static_cast<double>(k_clients) * static_cast<double>(stage.iters_t));
  out.w.scale(inv);
  out.a *= inv;
  out.b *= inv;
  out.alpha *= inv;
  if (stage.window_i > 1) ledger.record_sync_round(k_clients, dim_v);
  if (!out.all_finite()) {
    throw DivergenceError("non-finite stage output", stage_index, t);
  }
  return out;
}

namespace {

RunOutput run_coda_family(const FedRunConfig& config, const Evaluator& ev,
                          const CodaPlusObserver* observer, bool npa_mode) {
  check_shards(config.shards);
  if (config.schedule.stages.empty()) throw ConfigError("empty schedule");

  PrimalDualPoint point =
      config.init ? *config.init : zeros_like(config.scorer);
  if (point.dim() != static_cast<std::size_t>(config.scorer.param_count())) {
    throw ShapeError("initial point does not match scorer dimension");
  }

  ThreadPool pool(std::min<int>(std::max(config.threads, 1),
                                static_cast<int>(config.shards.size())));
  InnerLoopArgs args;
  args.scorer = &config.scorer;
  args.base_ctx = &config.base_ctx;
  args.shards = config.shards;
  args.root_seed = config.root_seed;
  args.pool = &pool;

  RunOutput out;
  out.ledger.record_setup_broadcast(static_cast<int>(config.shards.size()));

  TraceBuilder tb(ev);
  ObjectiveContext first_ctx = make_stage_ctx(config.base_ctx,
                                              config.schedule.stages[0].prox_coeff,
                                              point);
  tb.initial(out.ledger, point, first_ctx);

  long cum_iters = 0;
  ObjectiveContext last_ctx = first_ctx;
  long last_round = 0;
  const int stage_count = static_cast<int>(config.schedule.stages.size());
  for (int s = 1; s <= stage_count; ++s) {
    Stage stage = config.schedule.stages[static_cast<std::size_t>(s - 1)];
    if (npa_mode) {
      if (stage.window_i != 1) {
        throw ConfigError("naive parallel mode requires window_i == 1");
      }
    }
    if (observer && observer->on_stage_start) {
      observer->on_stage_start(s, point, point);
    }
    const long stage_base = cum_iters;
    last_ctx = make_stage_ctx(config.base_ctx, stage.prox_coeff, point);
    auto hook = [&](int stage_idx, long round, long iters_in_stage,
                    const PrimalDualPoint& synced,
                    const ObjectiveContext& stage_ctx) {
      last_round = round;
      tb.maybe(stage_idx, round, stage_base + iters_in_stage, out.ledger,
               synced, stage_ctx);
    };
    point = coda_plus_inner(args, point, stage, s, out.ledger, hook);
    cum_iters += stage.iters_t;
    out.total_samples += stage.iters_t *
                         static_cast<long>(config.shards.size()) *
                         stage.batch_m;
    if (observer && observer->on_stage_end) observer->on_stage_end(s, point);
  }

  out.total_iters = cum_iters;
  tb.record(stage_count, last_round, cum_iters, out.ledger, point, last_ctx);
  out.trace = std::move(tb.trace);
  out.final_point = std::move(point);
  return out;
}

}  // namespace

RunOutput run_coda_plus(const FedRunConfig& config, const Evaluator& ev,
                        const CodaPlusObserver* observer) {
  return run_coda_family(config, ev, observer, /*npa_mode=*/false);
}

RunOutput run_npa(const FedRunConfig& config, const Evaluator& ev,
                  const CodaPlusObserver* observer) {
  return run_coda_family(config, ev, observer, /*npa_mode=*/true);
}

void codasca_round(const CodascaRoundArgs& args, PrimalDualPoint& round_start,
                   std::vector<ClientState>& clients, ControlVariate& global_cv,
                   CommLedger& ledger) {
  check_shards(args.shards);
  if (clients.size() != args.shards.size()) {
    throw ConfigError("client state count must match shard count");
  }
  if (!(args.eta_local > 0.0)) throw ConfigError("eta_local must be > 0");
  if (args.steps < 1) throw ConfigError("round must run >= 1 local steps");

  const std::size_t dim = round_start.dim();
  const std::size_t dim_v = dim + 2;
  if (global_cv.c_v.size() != dim_v) {
    throw ShapeError("control variate dimension mismatch");
  }

  const double eta_l = args.eta_local;
  auto body = [&](int kk) {
    ClientState& st = clients[static_cast<std::size_t>(kk)];
    const ClientShard& shard =
        args.shards[static_cast<std::size_t>(st.shard_ref)];
    const std::size_t shard_n = shard.samples.size();
    st.point = round_start;  // broadcast from the previous round
    GradV g;
    g.d_w = DenseVector(dim);
    DenseVector dh(dim);
    const double* cl = st.cv.c_v.data();
    const double* cg = global_cv.c_v.data();
    for (int t = 0; t < args.steps; ++t) {
      RngStream rng = derive_stream(
          args.root_seed, static_cast<std::uint64_t>(args.stage_index),
          static_cast<std::uint64_t>(args.round_index),
          static_cast<std::uint64_t>(kk), static_cast<std::uint64_t>(t));
      try {
        const Sample& s = shard.samples[rng.next_index(shard_n)];
        const double h = score_and_grad(*args.scorer, st.point.w, s.x, dh);
        sample_grad_v_into(g, *args.stage_ctx, st.point, s, h, dh);
        const double ga = sample_grad_alpha(*args.stage_ctx, st.point, s, h);
        kernels::corrected_step(st.point.w.data(), eta_l, g.d_w.data(), cl, cg,
                                dim);
        st.point.a -= eta_l * (g.d_a - cl[dim] + cg[dim]);
        st.point.b -= eta_l * (g.d_b - cl[dim + 1] + cg[dim + 1]);
        st.point.alpha += eta_l * (ga - st.cv.c_alpha + global_cv.c_alpha);
      } catch (const NumericalError&) {
        throw DivergenceError("non-finite iterate", args.stage_index,
                              args.iter_base + t);
      }
    }
    // Difference form of the control refresh; equals the round's mean
    // stochastic gradient.
    const double inv = 1.0 / (static_cast<double>(args.steps) * eta_l);
    st.cv.c_v.sub(global_cv.c_v);
    kernels::axpy(st.cv.c_v.data(), inv, round_start.w.data(), dim);
    kernels::axpy(st.cv.c_v.data(), -inv, st.point.w.data(), dim);
    st.cv.c_v[dim] += inv * (round_start.a - st.point.a);
    st.cv.c_v[dim + 1] += inv * (round_start.b - st.point.b);
    st.cv.c_alpha = st.cv.c_alpha - global_cv.c_alpha +
                    inv * (st.point.alpha - round_start.alpha);
  };
  if (args.pool) {
    args.pool->parallel_for(static_cast<int>(clients.size()), body);
  } else {
    for (int k = 0; k < static_cast<int>(clients.size()); ++k) body(k);
  }

  ControlVariate new_global(dim_v);
  for (const ClientState& st : clients) {
    new_global.c_v.add(st.cv.c_v);
    new_global.c_alpha += st.cv.c_alpha;
  }
  const double inv_k = 1.0 / static_cast<double>(clients.size());
  new_global.c_v.scale(inv_k);
  new_global.c_alpha *= inv_k;

  PrimalDualPoint agg = average_points(clients);
  if (!agg.all_finite()) {
    throw DivergenceError("non-finite aggregate", args.stage_index,
                          args.iter_base + args.steps);
  }

  // Server extrapolation around the previous broadcast.
  PrimalDualPoint next = round_start;
  DenseVector diff = agg.w;
  diff.sub(round_start.w);
  next.w.axpy(args.eta_global, diff);
  next.a += args.eta_global * (agg.a - round_start.a);
  next.b += args.eta_global * (agg.b - round_start.b);
  next.alpha += args.eta_global * (agg.alpha - round_start.alpha);
  if (!next.all_finite()) {
    throw DivergenceError("non-finite extrapolated point", args.stage_index,
                          args.iter_base + args.steps);
  }

  global_cv = std::move(new_global);
  round_start = std::move(next);
  ledger.record_control_round(static_cast<int>(clients.size()), dim_v);
}

RunOutput run_codasca(const FedRunConfig& config, const Evaluator& ev,
                      const CodascaObserver* observer) {
  check_shards(config.shards);
  if (config.schedule.stages.empty()) throw ConfigError("empty schedule");

  PrimalDualPoint point =
      config.init ? *config.init : zeros_like(config.scorer);
  if (point.dim() != static_cast<std::size_t>(config.scorer.param_count())) {
    throw ShapeError("initial point does not match scorer dimension");
  }
  const std::size_t dim_v = point.dim() + 2;
  const int k_clients = static_cast<int>(config.shards.size());

  ThreadPool pool(std::min<int>(std::max(config.threads, 1), k_clients));

  std::vector<ClientState> clients(static_cast<std::size_t>(k_clients));
  for (int k = 0; k < k_clients; ++k) {
    ClientState& st = clients[static_cast<std::size_t>(k)];
    st.shard_ref = k;
    st.point = point;
    st.cv = ControlVariate(dim_v);
  }
  ControlVariate global_cv(dim_v);

  RunOutput out;
  out.ledger.record_setup_broadcast(k_clients);

  TraceBuilder tb(ev);
  ObjectiveContext stage_ctx = make_stage_ctx(
      config.base_ctx, config.schedule.stages[0].prox_coeff, point);
  tb.initial(out.ledger, point, stage_ctx);

  long cum_iters = 0;
  long last_round = 0;
  const int stage_count = static_cast<int>(config.schedule.stages.size());
  for (int s = 1; s <= stage_count; ++s) {
    const Stage& stage = config.schedule.stages[static_cast<std::size_t>(s - 1)];
    if (stage.rounds_r < 1) throw ConfigError("rounds_r must be >= 1");
    if (stage.window_i < 1) throw ConfigError("window_i must be >= 1");
    const long iters_t =
        stage.iters_t > 0 ? stage.iters_t
                          : stage.rounds_r * static_cast<long>(stage.window_i);
    const long full_rounds_iters =
        (stage.rounds_r - 1) * static_cast<long>(stage.window_i);
    const long last_steps = iters_t - full_rounds_iters;
    if (last_steps < 1 || last_steps > stage.window_i) {
      throw ConfigError("iters_t inconsistent with rounds_r * window_i");
    }

    // Fresh subproblem: new prox center, control variates restart at zero.
    stage_ctx = make_stage_ctx(config.base_ctx, stage.prox_coeff, point);
    for (ClientState& st : clients) st.cv.reset();
    global_cv.reset();

    long selected_round = stage.rounds_r;
    if (!config.codasca_last_round) {
      RngStream pick = derive_stream(config.root_seed, 0,
                                     rng_purpose::kRoundSelect,
                                     static_cast<std::uint64_t>(s), 0);
      selected_round =
          1 + static_cast<long>(pick.next_index(
                  static_cast<std::uint64_t>(stage.rounds_r)));
    }
    PrimalDualPoint selected = point;

    long iters_in_stage = 0;
    for (long r = 1; r <= stage.rounds_r; ++r) {
      const int steps = static_cast<int>(
          r == stage.rounds_r ? last_steps : stage.window_i);
      CodascaRoundArgs rargs;
      rargs.scorer = &config.scorer;
      rargs.stage_ctx = &stage_ctx;
      rargs.shards = config.shards;
      rargs.root_seed = config.root_seed;
      rargs.stage_index = s;
      rargs.round_index = r;
      rargs.eta_local = stage.eta_local;
      rargs.eta_global = stage.eta_global;
      rargs.steps = steps;
      rargs.iter_base = iters_in_stage;
      rargs.pool = &pool;
      if (observer && observer->on_round_start) {
        observer->on_round_start(s, r, point, global_cv, clients);
      }
      codasca_round(rargs, point, clients, global_cv, out.ledger);
      iters_in_stage += steps;
      cum_iters += steps;
      out.total_samples += static_cast<long>(steps) * k_clients;
      if (observer && observer->on_round_end) {
        observer->on_round_end(s, r, clients, global_cv, point);
      }
      if (r == selected_round) selected = point;
      last_round = r;
      tb.maybe(s, r, cum_iters, out.ledger, point, stage_ctx);
    }

    point = selected;
    for (ClientState& st : clients) st.point = point;
    if (observer && observer->on_stage_end) {
      observer->on_stage_end(s, selected_round, point);
    }
  }

  out.total_iters = cum_iters;
  tb.record(stage_count, last_round, cum_iters, out.ledger, point, stage_ctx);
  out.trace = std::move(tb.trace);
  out.final_point = std::move(point);
  return out;
}

StageSchedule theory_schedule_coda_plus(const TheoryConstants& tc, double eta0,
                                        int k_clients, bool heterogeneous,
                                        int stages) {
  tc.validate();
  if (!(eta0 > 0.0)) throw ConfigError("eta0 must be > 0");
  if (k_clients < 1) throw ConfigError("k_clients must be >= 1");
  if (stages < 1) throw ConfigError("stages must be >= 1");

  const double gamma = 2.0 * tc.ell;
  const double l_hat = tc.big_l + 2.0 * tc.ell;
  const double c = (tc.mu / l_hat) / (5.0 + tc.mu / l_hat);
  const double t_base = 212.0 / (eta0 * std::min(tc.ell, tc.mu2));

  StageSchedule sched;
  sched.stages.reserve(static_cast<std::size_t>(stages));
  for (int s = 1; s <= stages; ++s) {
    const double decay = std::exp(-static_cast<double>(s - 1) * c);
    Stage stage;
    stage.eta_local = eta0 * decay;
    stage.raw_iters = t_base / decay;
    stage.iters_t = static_cast<long>(std::ceil(stage.raw_iters));
    stage.raw_window =
        heterogeneous
            ? 1.0 / std::sqrt(static_cast<double>(k_clients) * stage.eta_local)
            : 1.0 / (static_cast<double>(k_clients) * stage.eta_local);
    stage.window_i = std::max(1, static_cast<int>(std::floor(stage.raw_window)));
    stage.prox_coeff = gamma;
    sched.stages.push_back(stage);
  }
  return sched;
}

StageSchedule theory_schedule_codasca(const TheoryConstants& tc,
                                      double eta_tilde, int i0, int k_clients,
                                      int stages) {
  tc.validate();
  if (i0 < 1) throw ConfigError("i0 must be >= 1");
  if (k_clients < 1) throw ConfigError("k_clients must be >= 1");
  if (stages < 1) throw ConfigError("stages must be >= 1");
  const double bound =
      std::min(1.0 / (3.0 * tc.ell + 3.0 * tc.ell * tc.ell / tc.mu2),
               tc.mu2 / (40.0 * tc.ell * tc.ell));
  if (!(eta_tilde > 0.0) || eta_tilde > bound) {
    throw ConfigError("eta_tilde must lie in (0, " + std::to_string(bound) +
                      "] = min(1/(3*ell + 3*ell^2/mu2), mu2/(40*ell^2))");
  }

  const double gamma = 2.0 * tc.ell;
  const double l_hat = tc.big_l + 2.0 * tc.ell;
  const double c = 4.0 * tc.ell + (248.0 / 53.0) * l_hat;
  const double growth = 2.0 * tc.mu / (c + 2.0 * tc.mu);
  const double eta_g = std::sqrt(static_cast<double>(k_clients));
  const long rounds =
      static_cast<long>(std::ceil(1000.0 / (eta_tilde * tc.mu2)));

  StageSchedule sched;
  sched.stages.reserve(static_cast<std::size_t>(stages));
  for (int s = 1; s <= stages; ++s) {
    Stage stage;
    stage.raw_window =
        static_cast<double>(i0) * std::exp(growth * static_cast<double>(s - 1));
    stage.window_i = static_cast<int>(std::ceil(stage.raw_window));
    stage.eta_global = eta_g;
    stage.eta_local = eta_tilde / (eta_g * static_cast<double>(stage.window_i));
    stage.rounds_r = rounds;
    stage.iters_t = rounds * static_cast<long>(stage.window_i);
    stage.raw_iters = static_cast<double>(stage.iters_t);
    stage.prox_coeff = gamma;
    sched.stages.push_back(stage);
  }
  return sched;
}

StageSchedule practical_schedule(double eta0, long decay_every_t0,
                                 double decay_factor, int fixed_i,
                                 long total_iters, double prox_coeff,
                                 double eta_global, int batch_m) {
  if (!(eta0 > 0.0)) throw ConfigError("eta0 must be > 0");
  if (decay_every_t0 < 1) throw ConfigError("decay_every_t0 must be >= 1");
  if (!(decay_factor > 0.0)) throw ConfigError("decay_factor must be > 0");
  if (fixed_i < 1) throw ConfigError("fixed_i must be >= 1");
  if (total_iters < 1) throw ConfigError("total_iters must be >= 1");
  if (prox_coeff < 0.0) throw ConfigError("prox_coeff must be >= 0");
  if (!(eta_global > 0.0)) throw ConfigError("eta_global must be > 0");
  if (batch_m < 1) throw ConfigError("batch_m must be >= 1");

  StageSchedule sched;
  double eta = eta0;
  for (long done = 0; done < total_iters; done += decay_every_t0) {
    Stage stage;
    stage.eta_local = eta;
    stage.eta_global = eta_global;
    stage.window_i = fixed_i;
    stage.iters_t = std::min<long>(decay_every_t0, total_iters - done);
    stage.rounds_r = (stage.iters_t + fixed_i - 1) / fixed_i;
    stage.prox_coeff = prox_coeff;
    stage.batch_m = batch_m;
    stage.raw_iters = static_cast<double>(stage.iters_t);
    stage.raw_window = static_cast<double>(fixed_i);
    sched.stages.push_back(stage);
    eta /= decay_factor;
  }
  return sched;
}

}  // namespace fedmax
