#ifndef MIGNN_FD_HPP
#define MIGNN_FD_HPP

#include <functional>

#include "mignn/tensor.hpp"

namespace mignn {

// scalar function of a single tensor
using ScalarFn = std::function<Tensor(const Tensor&)>;

// Central-difference gradient check of f at x. Returns the maximum relative
// error between the analytic gradient and finite differences with
// eps_i = 1e-6 * (1 + |x_i|); the denominator is max(1e-8, |analytic|, |fd|).
double fd_check(const ScalarFn& f, const Tensor& x);

// Second-order check: compares each Hessian row, obtained by differentiating
// through the recorded backward pass, against central differences of the
// analytic gradient. Same error normalization as fd_check.
double fd_check_second_order(const ScalarFn& f, const Tensor& x);

// Analytic gradient values of f at a plain input (fresh tape)
Tensor analytic_gradient(const ScalarFn& f, const Tensor& x);

}  // namespace mignn

#endif
