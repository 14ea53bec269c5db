#pragma once

#include "fedmax/dense_vector.hpp"

namespace fedmax {

enum class ScorerKind { Linear, Mlp1 };
enum class Activation { Tanh };

// Scoring function family. Linear scores by dot(w, x); Mlp1 is a one-hidden-
// layer tanh perceptron with parameters packed as
// [W1 (hidden x d_in row-major) | b1 (hidden) | W2 (hidden) | b2].
struct ScorerSpec {
  ScorerKind kind = ScorerKind::Linear;
  int input_dim = 0;
  int hidden_dim = 0;
  Activation activation = Activation::Tanh;

  static ScorerSpec linear(int input_dim);
  static ScorerSpec mlp1(int input_dim, int hidden_dim);

  int param_count() const;
};

double score(const ScorerSpec& spec, const DenseVector& w,
             const DenseVector& x);

DenseVector score_grad(const ScorerSpec& spec, const DenseVector& w,
                       const DenseVector& x);

// Fused evaluation for inner loops: returns the score, writes the parameter
// gradient into grad (resized if needed).
double score_and_grad(const ScorerSpec& spec, const DenseVector& w,
                      const DenseVector& x, DenseVector& grad);

}  // namespace fedmax
