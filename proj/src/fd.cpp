#include "mignn/fd.hpp"

#include <algorithm>
#include <cmath>

#include "mignn/ops.hpp"

namespace mignn {

namespace {

double rel_error(double analytic, double numeric) {
    const double denom = std::max({1e-8, std::abs(analytic), std::abs(numeric)});
    return std::abs(analytic - numeric) / denom;
}

double eval_value(const ScalarFn& f, const Tensor& x) {
    // no active tape: runs as plain arithmetic
    return f(x).value();
}

}  // namespace

Tensor analytic_gradient(const ScalarFn& f, const Tensor& x) {
    Tape tape;
    Tape::Activate scope(tape);
    Tensor leaf = tape.leaf(x);
    Tensor y = f(leaf);
    if (!y.on_tape()) return Tensor::zeros(x.shape());  // f does not depend on x
    return backward(y, {leaf})[0].detach();
}

double fd_check(const ScalarFn& f, const Tensor& x) {
    Tensor grad = analytic_gradient(f, x);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const double eps = 1e-6 * (1.0 + std::abs(x[i]));
        Tensor xp = x.detach();
        Tensor xm = x.detach();
        xp.mutable_data()[i] += eps;
        xm.mutable_data()[i] -= eps;
        const double fd = (eval_value(f, xp) - eval_value(f, xm)) / (2.0 * eps);
        worst = std::max(worst, rel_error(grad[i], fd));
    }
    return worst;
}

double fd_check_second_order(const ScalarFn& f, const Tensor& x) {
    const std::size_t n = x.numel();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // analytic Hessian row i: backward through the recorded backward pass
        Tape tape;
        Tape::Activate scope(tape);
        Tensor leaf = tape.leaf(x);
        Tensor y = f(leaf);
        Tensor grad = backward(y, {leaf}, /*create_graph=*/true)[0];
        Tensor pick = Tensor::zeros(x.shape());
        pick.mutable_data()[i] = 1.0;
        Tensor gi = sum_all(hadamard(grad, pick));
        // a gradient with no tape dependence means f is locally linear
        Tensor hrow = gi.on_tape() ? backward(gi, {leaf})[0] : Tensor::zeros(x.shape());

        // finite differences of the analytic gradient along coordinate i
        const double eps = 1e-5 * (1.0 + std::abs(x[i]));
        Tensor xp = x.detach();
        Tensor xm = x.detach();
        xp.mutable_data()[i] += eps;
        xm.mutable_data()[i] -= eps;
        Tensor gp = analytic_gradient(f, xp);
        Tensor gm = analytic_gradient(f, xm);
        for (std::size_t j = 0; j < n; ++j) {
            const double fd = (gp[j] - gm[j]) / (2.0 * eps);
            worst = std::max(worst, rel_error(hrow[j], fd));
        }
    }
    return worst;
}

}  // namespace mignn
