#include "fedmax/objective.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "fedmax/errors.hpp"

namespace fedmax {

namespace {

void check_ratio(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw ConfigError("positive ratio p must lie in (0,1); got " +
                      std::to_string(p));
  }
}

void check_label(int label) {
  if (label != 1 && label != -1) {
    throw ConfigError("sample label must be +1 or -1; got " +
                      std::to_string(label));
  }
}

void check_finite_point(const PrimalDualPoint& point, double h) {
  if (!std::isfinite(h) || !std::isfinite(point.a) ||
      !std::isfinite(point.b) || !std::isfinite(point.alpha)) {
    throw NumericalError("non-finite input to per-sample gradient");
  }
}

}  // namespace

ObjectiveContext ObjectiveContext::make(double p) {
  check_ratio(p);
  ObjectiveContext ctx;
  ctx.p = p;
  ctx.mu2 = 2.0 * p * (1.0 - p);
  return ctx;
}

ObjectiveContext ObjectiveContext::make_prox(double p, double gamma,
                                             PrimalDualPoint center) {
  ObjectiveContext ctx = make(p);
  if (!(gamma > 0.0)) throw ConfigError("prox coefficient must be > 0");
  ctx.prox_coeff = gamma;
  ctx.prox_center = std::move(center);
  return ctx;
}

ObjectiveContext ObjectiveContext::with_prox(double gamma,
                                             PrimalDualPoint center) const {
  return make_prox(p, gamma, std::move(center));
}

ObjectiveContext ObjectiveContext::without_prox() const { return make(p); }

void sample_grad_v_into(GradV& out, const ObjectiveContext& ctx,
                        const PrimalDualPoint& point, const Sample& sample,
                        double h, const DenseVector& dh) {
  check_label(sample.label);
  check_finite_point(point, h);
  const double p = ctx.p;
  double coef_w;
  if (sample.label == 1) {
    const double resid = h - point.a;
    out.d_a = -2.0 * (1.0 - p) * resid;
    out.d_b = 0.0;
    coef_w = 2.0 * (1.0 - p) * resid - 2.0 * (1.0 + point.alpha) * (1.0 - p);
  } else {
    const double resid = h - point.b;
    out.d_a = 0.0;
    out.d_b = -2.0 * p * resid;
    coef_w = 2.0 * p * resid + 2.0 * (1.0 + point.alpha) * p;
  }
  if (out.d_w.size() != dh.size()) {
    throw ShapeError("gradient buffer length mismatch");
  }
  kernels::scale_copy(out.d_w.data(), coef_w, dh.data(), dh.size());
  if (ctx.prox_coeff > 0.0) {
    const PrimalDualPoint& c = *ctx.prox_center;
    if (c.dim() != point.dim()) {
      throw ShapeError("prox center dimension mismatch");
    }
    out.d_w.axpy(ctx.prox_coeff, point.w);
    out.d_w.axpy(-ctx.prox_coeff, c.w);
    out.d_a += ctx.prox_coeff * (point.a - c.a);
    out.d_b += ctx.prox_coeff * (point.b - c.b);
  }
}

GradV sample_grad_v(const ObjectiveContext& ctx, const PrimalDualPoint& point,
                    const Sample& sample, double h, const DenseVector& dh) {
  GradV out;
  out.d_w = DenseVector(dh.size());
  sample_grad_v_into(out, ctx, point, sample, h, dh);
  return out;
}

double sample_grad_alpha(const ObjectiveContext& ctx,
                         const PrimalDualPoint& point, const Sample& sample,
                         double h) {
  check_label(sample.label);
  check_finite_point(point, h);
  const double p = ctx.p;
  const double concave = 2.0 * p * (1.0 - p) * point.alpha;
  if (sample.label == 1) return -2.0 * (1.0 - p) * h - concave;
  return 2.0 * p * h - concave;
}

double full_objective(const ObjectiveContext& ctx, const PrimalDualPoint& point,
                      std::span<const Sample> data,
                      std::span<const double> scores) {
  if (data.empty()) throw EmptyDatasetError("objective over empty dataset");
  if (data.size() != scores.size()) {
    throw ShapeError("scores not aligned with data");
  }
  const double p = ctx.p;
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    check_label(data[i].label);
    const double h = scores[i];
    if (data[i].label == 1) {
      const double resid = h - point.a;
      acc += (1.0 - p) * resid * resid -
             2.0 * (1.0 + point.alpha) * (1.0 - p) * h;
    } else {
      const double resid = h - point.b;
      acc += p * resid * resid + 2.0 * (1.0 + point.alpha) * p * h;
    }
  }
  double value = acc / static_cast<double>(data.size()) -
                 p * (1.0 - p) * point.alpha * point.alpha;
  if (ctx.prox_coeff > 0.0) {
    value += 0.5 * ctx.prox_coeff * point.v_sq_dist(*ctx.prox_center);
  }
  return value;
}

InnerSolution closed_form_inner(const ObjectiveContext& ctx,
                                std::span<const Sample> data,
                                std::span<const double> scores) {
  if (data.empty()) throw EmptyDatasetError("empty dataset");
  if (data.size() != scores.size()) {
    throw ShapeError("scores not aligned with data");
  }
  double pos_sum = 0.0, neg_sum = 0.0;
  std::size_t pos_n = 0, neg_n = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    check_label(data[i].label);
    if (data[i].label == 1) {
      pos_sum += scores[i];
      ++pos_n;
    } else {
      neg_sum += scores[i];
      ++neg_n;
    }
  }
  if (pos_n == 0 || neg_n == 0) {
    throw SingleClassError("inner solution needs both classes");
  }
  InnerSolution sol;
  sol.a_star = pos_sum / static_cast<double>(pos_n);
  sol.b_star = neg_sum / static_cast<double>(neg_n);
  sol.alpha_star = sol.b_star - sol.a_star;
  PrimalDualPoint at;
  at.a = sol.a_star;
  at.b = sol.b_star;
  at.alpha = sol.alpha_star;
  sol.value = full_objective(ctx.without_prox(), at, data, scores);
  return sol;
}

double pairwise_auc_square_loss(std::span<const Sample> data,
                                std::span<const double> scores) {
  if (data.size() != scores.size()) {
    throw ShapeError("scores not aligned with data");
  }
  double acc = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].label != 1) continue;
    for (std::size_t j = 0; j < data.size(); ++j) {
      if (data[j].label != -1) continue;
      const double margin = 1.0 - scores[i] + scores[j];
      acc += margin * margin;
      ++pairs;
    }
  }
  if (pairs == 0) throw SingleClassError("pairwise loss needs both classes");
  return acc / static_cast<double>(pairs);
}

}  // namespace fedmax
