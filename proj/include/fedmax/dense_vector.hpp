#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "fedmax/errors.hpp"
#include "fedmax/kernels.hpp"

namespace fedmax {

// Fixed-length vector of 64-bit floats. The length is set at construction;
// arithmetic routes through the kernel layer.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n, double value = 0.0) : data_(n, value) {}
  static DenseVector of(std::vector<double> values) {
    DenseVector v;
    v.data_ = std::move(values);
    return v;
  }

  std::size_t size() const { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  void fill(double value) { data_.assign(data_.size(), value); }

  void add(const DenseVector& x) {
    check_size(x);
    kernels::add(data(), x.data(), size());
  }
  void sub(const DenseVector& x) {
    check_size(x);
    kernels::sub(data(), x.data(), size());
  }
  // this += a * x
  void axpy(double a, const DenseVector& x) {
    check_size(x);
    kernels::axpy(data(), a, x.data(), size());
  }
  void scale(double a) { kernels::scale(data(), a, size()); }

  double dot(const DenseVector& x) const {
    check_size(x);
    return kernels::dot(data(), x.data(), size());
  }
  double sq_norm() const { return kernels::sq_norm(data(), size()); }
  double sq_dist(const DenseVector& x) const {
    check_size(x);
    return kernels::sq_dist(data(), x.data(), size());
  }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const DenseVector& o) const { return data_ == o.data_; }

 private:
  void check_size(const DenseVector& x) const {
    if (x.size() != size()) {
      throw ShapeError("vector length mismatch: " + std::to_string(size()) +
                       " vs " + std::to_string(x.size()));
    }
  }
  std::vector<double> data_;
};

// Joint variable moved by every algorithm: primal block v = (w, a, b) plus
// the dual scalar alpha.
struct PrimalDualPoint {
  DenseVector w;
  double a = 0.0;
  double b = 0.0;
  double alpha = 0.0;

  PrimalDualPoint() = default;
  explicit PrimalDualPoint(std::size_t dim) : w(dim) {}

  std::size_t dim() const { return w.size(); }

  bool all_finite() const {
    return w.all_finite() && std::isfinite(a) && std::isfinite(b) &&
           std::isfinite(alpha);
  }

  // Squared distance over the primal block (w, a, b); alpha excluded.
  double v_sq_dist(const PrimalDualPoint& o) const {
    const double da = a - o.a;
    const double db = b - o.b;
    return w.sq_dist(o.w) + da * da + db * db;
  }
};

}  // namespace fedmax
