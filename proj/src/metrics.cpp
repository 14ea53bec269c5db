#include "fedmax/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>

#include "fedmax/errors.hpp"
#include "fedmax/kernels.hpp"

namespace fedmax {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Dense symmetric positive definite solve via Cholesky; a is n x n
// row-major and is overwritten with the factor.
void cholesky_solve(std::vector<double>& a, std::vector<double>& rhs,
                    std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t p = 0; p < j; ++p) diag -= a[j * n + p] * a[j * n + p];
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw NumericalError("normal equations not positive definite");
    }
    const double root = std::sqrt(diag);
    a[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double off = a[i * n + j];
      for (std::size_t p = 0; p < j; ++p) off -= a[i * n + p] * a[j * n + p];
      a[i * n + j] = off / root;
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < n; ++i) {
    double v = rhs[i];
    for (std::size_t p = 0; p < i; ++p) v -= a[i * n + p] * rhs[p];
    rhs[i] = v / a[i * n + i];
  }
  for (std::size_t ii = n; ii > 0; --ii) {
    const std::size_t i = ii - 1;
    double v = rhs[i];
    for (std::size_t p = i + 1; p < n; ++p) v -= a[p * n + i] * rhs[p];
    rhs[i] = v / a[i * n + i];
  }
}

}  // namespace

double empirical_auc(std::span<const double> scores,
                     std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("scores not aligned with labels");
  }
  if (scores.empty()) throw EmptyDatasetError("empty dataset");
  std::size_t pos = 0, neg = 0;
  for (int y : labels) {
    if (y == 1) {
      ++pos;
    } else if (y == -1) {
      ++neg;
    } else {
      throw ConfigError("labels must be +1 or -1");
    }
  }
  if (pos == 0 || neg == 0) throw SingleClassError("need both classes for AUC");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Midrank sum over positives.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           scores[order[j + 1]] == scores[order[i]]) {
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]] == 1) pos_rank_sum += midrank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(pos);
  const double nn = static_cast<double>(neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

DatasetGrad dataset_gradient(const ScorerSpec& spec, const ObjectiveContext& ctx,
                             const PrimalDualPoint& point,
                             std::span<const Sample> data) {
  if (data.empty()) throw EmptyDatasetError("gradient over empty dataset");
  DatasetGrad out;
  out.v.d_w = DenseVector(point.dim());
  GradV g;
  g.d_w = DenseVector(point.dim());
  DenseVector dh(point.dim());
  // Accumulate sample gradients without prox, then add prox once at the end.
  const ObjectiveContext plain = ctx.without_prox();
  for (const Sample& s : data) {
    const double h = score_and_grad(spec, point.w, s.x, dh);
    sample_grad_v_into(g, plain, point, s, h, dh);
    out.v.d_w.add(g.d_w);
    out.v.d_a += g.d_a;
    out.v.d_b += g.d_b;
    out.alpha += sample_grad_alpha(plain, point, s, h);
  }
  const double inv = 1.0 / static_cast<double>(data.size());
  out.v.d_w.scale(inv);
  out.v.d_a *= inv;
  out.v.d_b *= inv;
  out.alpha *= inv;
  if (ctx.prox_coeff > 0.0) {
    const PrimalDualPoint& c = *ctx.prox_center;
    out.v.d_w.axpy(ctx.prox_coeff, point.w);
    out.v.d_w.axpy(-ctx.prox_coeff, c.w);
    out.v.d_a += ctx.prox_coeff * (point.a - c.a);
    out.v.d_b += ctx.prox_coeff * (point.b - c.b);
  }
  return out;
}

double duality_gap_linear(const ScorerSpec& spec, const ObjectiveContext& ctx,
                          const PrimalDualPoint& point,
                          std::span<const Sample> data) {
  if (spec.kind != ScorerKind::Linear) {
    throw ConfigError("duality gap is available for the linear scorer only");
  }
  if (!(ctx.prox_coeff > 0.0)) {
    throw ConfigError("duality gap requires an active prox term");
  }
  if (data.empty()) throw EmptyDatasetError("empty dataset");

  const std::size_t n = data.size();
  const std::size_t d = point.dim();
  const double p = ctx.p;

  std::vector<double> scores(n);
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = kernels::dot(point.w.data(), data[i].x.data(), d);
    (data[i].label == 1 ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) throw SingleClassError("need both classes");

  // Inner max over alpha in closed form.
  double s_lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s_lin += data[i].label == 1 ? -(1.0 - p) * scores[i] : p * scores[i];
  }
  s_lin /= static_cast<double>(n);
  const double alpha_star = s_lin / (p * (1.0 - p));
  PrimalDualPoint max_point = point;
  max_point.alpha = alpha_star;
  const double max_value = full_objective(ctx, max_point, data, scores);

  // Inner min over v' = (w, a, b): assemble H v' = gamma*center - q where
  // H = 2 * sum_i coef_i u_i u_i^T + gamma I, u_i = (x_i, -1, 0) or
  // (x_i, 0, -1), and q carries the alpha coupling on the w block.
  const std::size_t dim = d + 2;
  std::vector<double> h_mat(dim * dim, 0.0);
  std::vector<double> rhs(dim, 0.0);
  const double gamma = ctx.prox_coeff;
  for (std::size_t i = 0; i < dim; ++i) h_mat[i * dim + i] = gamma;

  std::vector<double> u(dim, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const bool is_pos = data[s].label == 1;
    const double coef =
        2.0 * (is_pos ? (1.0 - p) : p) / static_cast<double>(n);
    for (std::size_t i = 0; i < d; ++i) u[i] = data[s].x[i];
    u[d] = is_pos ? -1.0 : 0.0;
    u[d + 1] = is_pos ? 0.0 : -1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double ci = coef * u[i];
      if (ci == 0.0) continue;
      kernels::axpy(h_mat.data() + i * dim, ci, u.data(), dim);
    }
    const double q_coef = 2.0 * (1.0 + point.alpha) *
                          (is_pos ? -(1.0 - p) : p) / static_cast<double>(n);
    kernels::axpy(rhs.data(), -q_coef, u.data(), d);  // w block of -q
  }
  const PrimalDualPoint& center = *ctx.prox_center;
  kernels::axpy(rhs.data(), gamma, center.w.data(), d);
  rhs[d] += gamma * center.a;
  rhs[d + 1] += gamma * center.b;

  cholesky_solve(h_mat, rhs, dim);

  PrimalDualPoint min_point;
  min_point.w = DenseVector(d);
  for (std::size_t i = 0; i < d; ++i) min_point.w[i] = rhs[i];
  min_point.a = rhs[d];
  min_point.b = rhs[d + 1];
  min_point.alpha = point.alpha;
  std::vector<double> min_scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    min_scores[i] = kernels::dot(min_point.w.data(), data[i].x.data(), d);
  }
  const double min_value = full_objective(ctx, min_point, data, min_scores);

  return max_value - min_value;
}

double client_drift_proxy(std::span<const ClientShard> shards,
                          const ScorerSpec& spec, const ObjectiveContext& ctx,
                          const PrimalDualPoint& point) {
  if (shards.size() < 2) throw ConfigError("drift proxy needs >= 2 shards");
  const ObjectiveContext plain = ctx.without_prox();
  std::vector<DatasetGrad> grads;
  grads.reserve(shards.size());
  for (const ClientShard& shard : shards) {
    if (shard.samples.empty()) {
      throw EmptyDatasetError("empty shard in drift proxy");
    }
    grads.push_back(dataset_gradient(spec, plain, point, shard.samples));
  }
  DatasetGrad mean;
  mean.v.d_w = DenseVector(point.dim());
  for (const auto& g : grads) {
    mean.v.d_w.add(g.v.d_w);
    mean.v.d_a += g.v.d_a;
    mean.v.d_b += g.v.d_b;
    mean.alpha += g.alpha;
  }
  const double inv_k = 1.0 / static_cast<double>(grads.size());
  mean.v.d_w.scale(inv_k);
  mean.v.d_a *= inv_k;
  mean.v.d_b *= inv_k;
  mean.alpha *= inv_k;

  double acc = 0.0;
  for (const auto& g : grads) {
    const double da = g.v.d_a - mean.v.d_a;
    const double db = g.v.d_b - mean.v.d_b;
    const double dal = g.alpha - mean.alpha;
    acc += g.v.d_w.sq_dist(mean.v.d_w) + da * da + db * db + dal * dal;
  }
  return acc * inv_k;
}

void RunTrace::write_csv(std::ostream& os) const {
  os << kCsvHeader << '\n';
  for (const TraceRow& row : rows) {
    os << row.stage << ',' << row.round << ',' << row.cum_iters << ','
       << row.cum_comm_rounds << ',' << format_double(row.train_objective)
       << ',' << format_double(row.test_auc) << ',';
    if (row.duality_gap) os << format_double(*row.duality_gap);
    os << '\n';
  }
}

std::string RunTrace::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

}  // namespace fedmax
