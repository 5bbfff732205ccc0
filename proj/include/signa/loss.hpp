#pragma once

#include <cmath>

#include "signa/ops.hpp"

namespace signa {

/// Multi-label binary cross entropy on logits: ŷ = sigmoid(logit) clamped
/// to [ε, 1-ε], loss summed over labels and averaged over the batch.
/// The gradient through a clamped element is zero, matching the forward
/// value exactly.
inline Tensor bce_loss(DiffGraph& g, const Tensor& logits, const Tensor& targets,
                       double eps = 1e-7) {
    if (logits.rank() != 2 || targets.shape() != logits.shape())
        throw ShapeError("bce_loss: logits " + detail::shape_str(logits.shape()) +
                         " and targets " + detail::shape_str(targets.shape()) +
                         " must be equal rank-2 shapes");
    if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("bce_loss: epsilon must be in (0, 0.5)");
    for (double t : targets.values())
        if (t != 0.0 && t != 1.0)
            throw NumericError("bce_loss: targets must be binary, found " + std::to_string(t));

    const int batch = logits.dim(0);
    Tensor out = Tensor::zeros({1}, logits.requires_grad());
    auto run = [logits, targets, out, eps, batch] {
        double total = 0.0;
        for (std::size_t i = 0; i < logits.size(); ++i) {
            const double yhat =
                std::clamp(detail::sigmoid_stable(logits[i]), eps, 1.0 - eps);
            const double y = targets[i];
            total -= y * std::log(yhat) + (1.0 - y) * std::log(1.0 - yhat);
        }
        out[0] = total / static_cast<double>(batch);
    };
    run();
    g.record(
        "bce_loss", {logits, targets}, out, run,
        [logits, targets, out, eps, batch] {
            if (!logits.requires_grad()) return;
            const double go = out.grad()[0] / static_cast<double>(batch);
            for (std::size_t i = 0; i < logits.size(); ++i) {
                const double yhat = detail::sigmoid_stable(logits[i]);
                if (yhat < eps || yhat > 1.0 - eps) continue;  // clamp region: flat
                logits.grad()[i] += go * (yhat - targets[i]);
            }
        });
    return out;
}

}  // namespace signa
