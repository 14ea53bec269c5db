#pragma once

#include <functional>

#include "fedmax/dense_vector.hpp"

namespace fedmax {

// Central-difference gradient of fn at x: component i is
// (fn(x + h e_i) - fn(x - h e_i)) / (2h). Throws NumericalError when an
// evaluation is non-finite, ConfigError when h <= 0.
DenseVector finite_diff_grad(const std::function<double(const DenseVector&)>& fn,
                             const DenseVector& x, double h);

// Same scheme for a scalar argument.
double finite_diff_scalar(const std::function<double(double)>& fn, double x,
                          double h);

}  // namespace fedmax
