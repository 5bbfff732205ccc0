#pragma once

#include <cmath>
#include <functional>

#include "signa/tensor.hpp"

namespace signa {

/// A deterministic scalar-valued function of one tensor, recorded on the
/// given graph. Parameters other than x are captured by the closure.
using ScalarFn = std::function<Tensor(DiffGraph&, const Tensor&)>;

/// Central-difference gradient verification.
///
/// Runs f once with recording to obtain the analytic gradient of x, then
/// perturbs each coordinate by ±h and compares. Returns the maximum over
/// coordinates of |analytic - numeric| / max(1, |analytic|, |numeric|).
inline double finite_diff_check(const ScalarFn& f, const Tensor& x, double h = 1e-6) {
    if (!(h > 0.0)) throw ConfigError("finite_diff_check: h must be positive");
    x.set_requires_grad(true);
    x.zero_grad();

    auto eval = [&f](const Tensor& t) {
        DiffGraph g;
        Tensor y = f(g, t);
        if (y.size() != 1)
            throw NumericError("finite_diff_check: f must return a scalar, got shape " +
                               detail::shape_str(y.shape()));
        return y;
    };

    {
        DiffGraph g;
        Tensor y = f(g, x);
        if (y.size() != 1)
            throw NumericError("finite_diff_check: f must return a scalar, got shape " +
                               detail::shape_str(y.shape()));
        reverse_pass(g, Tensor::scalar(1.0));
    }

    double max_rel = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double fp = eval(x)[0];
        x[i] = saved - h;
        const double fm = eval(x)[0];
        x[i] = saved;
        const double numeric = (fp - fm) / (2.0 * h);
        const double analytic = x.grad()[i];
        const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
        max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
    }
    return max_rel;
}

}  // namespace signa
