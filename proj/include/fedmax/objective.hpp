#pragma once

#include <optional>
#include <span>

#include "fedmax/dense_vector.hpp"

namespace fedmax {

// Parameters of the square-surrogate saddle objective. p is the global
// positive-class ratio; mu2 = 2p(1-p) is the strong-concavity constant in
// alpha. When prox_coeff > 0 the stage penalty
// (prox_coeff / 2) * ||v - prox_center||^2 over v = (w, a, b) is active.
struct ObjectiveContext {
  double p = 0.5;
  double mu2 = 0.5;
  double prox_coeff = 0.0;
  std::optional<PrimalDualPoint> prox_center;

  static ObjectiveContext make(double p);
  static ObjectiveContext make_prox(double p, double gamma,
                                    PrimalDualPoint center);
  ObjectiveContext with_prox(double gamma, PrimalDualPoint center) const;
  ObjectiveContext without_prox() const;
};

struct Sample {
  DenseVector x;
  int label = 1;  // +1 or -1
};

// Gradient of the per-sample objective in the primal block v = (w, a, b).
struct GradV {
  DenseVector d_w;
  double d_a = 0.0;
  double d_b = 0.0;
};

// Per-sample gradient in v. h is the score of the model at sample.x and dh
// its gradient in w, both supplied by the caller. Includes the prox term
// when the context carries one.
GradV sample_grad_v(const ObjectiveContext& ctx, const PrimalDualPoint& point,
                    const Sample& sample, double h, const DenseVector& dh);

// In-place variant for hot loops; out.d_w must have length dh.size().
void sample_grad_v_into(GradV& out, const ObjectiveContext& ctx,
                        const PrimalDualPoint& point, const Sample& sample,
                        double h, const DenseVector& dh);

// Per-sample gradient in the dual variable alpha.
double sample_grad_alpha(const ObjectiveContext& ctx,
                         const PrimalDualPoint& point, const Sample& sample,
                         double h);

// Empirical mean of the per-sample objective over data (scores aligned with
// data), plus the prox penalty when active.
double full_objective(const ObjectiveContext& ctx, const PrimalDualPoint& point,
                      std::span<const Sample> data,
                      std::span<const double> scores);

// Stationary inner solution at fixed scores: a* is the positive-score mean,
// b* the negative-score mean, alpha* = b* - a*, value the saddle value of
// the empirical objective (no prox).
struct InnerSolution {
  double a_star = 0.0;
  double b_star = 0.0;
  double alpha_star = 0.0;
  double value = 0.0;
};

InnerSolution closed_form_inner(const ObjectiveContext& ctx,
                                std::span<const Sample> data,
                                std::span<const double> scores);

// Mean over all (positive, negative) pairs of (1 - s_pos + s_neg)^2.
// Brute-force reference for the saddle formulation.
double pairwise_auc_square_loss(std::span<const Sample> data,
                                std::span<const double> scores);

}  // namespace fedmax
