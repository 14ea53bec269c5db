#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "fedmax/data_gen.hpp"
#include "fedmax/models.hpp"
#include "fedmax/objective.hpp"

namespace fedmax {

// Mann-Whitney estimate: fraction of (positive, negative) pairs ranked
// correctly, ties counted as 1/2. Sort-based with midranks.
double empirical_auc(std::span<const double> scores, std::span<const int> labels);

// Full-dataset gradient of the objective at a point (prox included when the
// context carries one): primal block plus the alpha derivative.
struct DatasetGrad {
  GradV v;
  double alpha = 0.0;
};
DatasetGrad dataset_gradient(const ScorerSpec& spec, const ObjectiveContext& ctx,
                             const PrimalDualPoint& point,
                             std::span<const Sample> data);

// Exact duality gap of the prox-regularized objective at (point.v, point.alpha)
// for the linear scorer: inner max over alpha is closed-form, inner min over
// v solves the positive-definite normal equations. Requires prox_coeff > 0.
double duality_gap_linear(const ScorerSpec& spec, const ObjectiveContext& ctx,
                          const PrimalDualPoint& point,
                          std::span<const Sample> data);

// Mean squared deviation of per-client full gradients from the global one,
// over both the primal block and alpha. Prox is ignored; it cancels anyway.
double client_drift_proxy(std::span<const ClientShard> shards,
                          const ScorerSpec& spec, const ObjectiveContext& ctx,
                          const PrimalDualPoint& point);

struct TraceRow {
  int stage = 0;
  long round = 0;
  long cum_iters = 0;
  long cum_comm_rounds = 0;
  double train_objective = 0.0;
  double test_auc = 0.0;
  std::optional<double> duality_gap;
};

struct RunTrace {
  static constexpr const char* kCsvHeader =
      "stage,round,cum_iters,cum_comm_rounds,train_objective,test_auc,duality_gap";

  std::vector<TraceRow> rows;

  void write_csv(std::ostream& os) const;
  std::string to_csv() const;
};

}  // namespace fedmax
