#include "fedmax/models.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fedmax/errors.hpp"
#include "fedmax/kernels.hpp"

namespace fedmax {

namespace {

void check_dims(const ScorerSpec& spec, const DenseVector& w,
                const DenseVector& x) {
  if (static_cast<int>(x.size()) != spec.input_dim) {
    throw ShapeError("input length " + std::to_string(x.size()) +
                     " does not match input_dim " +
                     std::to_string(spec.input_dim));
  }
  if (static_cast<int>(w.size()) != spec.param_count()) {
    throw ShapeError("parameter length " + std::to_string(w.size()) +
                     " does not match spec parameter count " +
                     std::to_string(spec.param_count()));
  }
}

// Hidden activations are tiny; one buffer per thread avoids per-call churn.
std::vector<double>& hidden_buffer() {
  thread_local std::vector<double> buf;
  return buf;
}

}  // namespace

ScorerSpec ScorerSpec::linear(int input_dim) {
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  ScorerSpec spec;
  spec.kind = ScorerKind::Linear;
  spec.input_dim = input_dim;
  return spec;
}

ScorerSpec ScorerSpec::mlp1(int input_dim, int hidden_dim) {
  if (input_dim < 1 || hidden_dim < 1) {
    throw ConfigError("input_dim and hidden_dim must be >= 1");
  }
  ScorerSpec spec;
  spec.kind = ScorerKind::Mlp1;
  spec.input_dim = input_dim;
  spec.hidden_dim = hidden_dim;
  return spec;
}

int ScorerSpec::param_count() const {
  if (kind == ScorerKind::Linear) return input_dim;
  return hidden_dim * (input_dim + 1) + hidden_dim + 1;
}

double score(const ScorerSpec& spec, const DenseVector& w,
             const DenseVector& x) {
  check_dims(spec, w, x);
  if (spec.kind == ScorerKind::Linear) {
    return kernels::dot(w.data(), x.data(), x.size());
  }
  const int d = spec.input_dim;
  const int hdim = spec.hidden_dim;
  const double* w1 = w.data();
  const double* b1 = w1 + static_cast<std::size_t>(hdim) * d;
  const double* w2 = b1 + hdim;
  const double b2 = w2[hdim];
  double out = b2;
  for (int j = 0; j < hdim; ++j) {
    const double pre =
        kernels::dot(w1 + static_cast<std::size_t>(j) * d, x.data(), d) + b1[j];
    out += w2[j] * std::tanh(pre);
  }
  return out;
}

double score_and_grad(const ScorerSpec& spec, const DenseVector& w,
                      const DenseVector& x, DenseVector& grad) {
  check_dims(spec, w, x);
  if (grad.size() != w.size()) grad = DenseVector(w.size());
  if (spec.kind == ScorerKind::Linear) {
    for (std::size_t i = 0; i < x.size(); ++i) grad[i] = x[i];
    return kernels::dot(w.data(), x.data(), x.size());
  }
  const int d = spec.input_dim;
  const int hdim = spec.hidden_dim;
  const double* w1 = w.data();
  const double* b1 = w1 + static_cast<std::size_t>(hdim) * d;
  const double* w2 = b1 + hdim;
  const double b2 = w2[hdim];

  auto& z = hidden_buffer();
  z.resize(static_cast<std::size_t>(hdim));
  double out = b2;
  for (int j = 0; j < hdim; ++j) {
    const double pre =
        kernels::dot(w1 + static_cast<std::size_t>(j) * d, x.data(), d) + b1[j];
    z[static_cast<std::size_t>(j)] = std::tanh(pre);
    out += w2[j] * z[static_cast<std::size_t>(j)];
  }

  double* g1 = grad.data();
  double* gb1 = g1 + static_cast<std::size_t>(hdim) * d;
  double* g2 = gb1 + hdim;
  for (int j = 0; j < hdim; ++j) {
    const double zj = z[static_cast<std::size_t>(j)];
    const double back = w2[j] * (1.0 - zj * zj);
    kernels::scale_copy(g1 + static_cast<std::size_t>(j) * d, back, x.data(), d);
    gb1[j] = back;
    g2[j] = zj;
  }
  g2[hdim] = 1.0;
  return out;
}

DenseVector score_grad(const ScorerSpec& spec, const DenseVector& w,
                       const DenseVector& x) {
  DenseVector grad(w.size());
  score_and_grad(spec, w, x, grad);
  return grad;
}

}  // namespace fedmax
