#include "fedmax/finite_diff.hpp"

#include <cmath>

#include "fedmax/errors.hpp"

namespace fedmax {

namespace {

double checked(double value) {
  if (!std::isfinite(value)) {
    throw NumericalError("non-finite function value in finite differences");
  }
  return value;
}

}  // namespace

DenseVector finite_diff_grad(const std::function<double(const DenseVector&)>& fn,
                             const DenseVector& x, double h) {
  if (!(h > 0.0)) throw ConfigError("finite difference step must be > 0");
  DenseVector grad(x.size());
  DenseVector probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    probe[i] = xi + h;
    const double up = checked(fn(probe));
    probe[i] = xi - h;
    const double down = checked(fn(probe));
    probe[i] = xi;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double finite_diff_scalar(const std::function<double(double)>& fn, double x,
                          double h) {
  if (!(h > 0.0)) throw ConfigError("finite difference step must be > 0");
  return (checked(fn(x + h)) - checked(fn(x - h))) / (2.0 * h);
}

}  // namespace fedmax
