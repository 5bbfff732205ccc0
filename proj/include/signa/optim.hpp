#pragma once

#include <cmath>
#include <vector>

#include "signa/tensor.hpp"

namespace signa {

/// Step-decay schedule: the rate is multiplied by `factor` once per full
/// `every` epochs elapsed. Sequential multiplication keeps the decade
/// values exact in double precision.
inline double lr_at_epoch(double base_lr, int epoch, int every = 25, double factor = 0.1) {
    if (every < 1) throw ConfigError("lr schedule: decay interval must be >= 1");
    double lr = base_lr;
    for (int k = 0; k < epoch / every; ++k) lr *= factor;
    return lr;
}

/// Adam with bias correction over a fixed parameter list.
class Adam {
public:
    explicit Adam(std::vector<Tensor> params, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
        m_.reserve(params_.size());
        v_.reserve(params_.size());
        for (const Tensor& p : params_) {
            m_.emplace_back(p.size(), 0.0);
            v_.emplace_back(p.size(), 0.0);
        }
    }

    void zero_grad() {
        for (const Tensor& p : params_) p.zero_grad();
    }

    void step(double lr) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t pi = 0; pi < params_.size(); ++pi) {
            const std::vector<double>& grad = params_[pi].grad();
            std::vector<double>& val = params_[pi].values();
            std::vector<double>& m = m_[pi];
            std::vector<double>& v = v_[pi];
            for (std::size_t i = 0; i < val.size(); ++i) {
                m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
                v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                val[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

    long step_count() const { return t_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
    double beta1_, beta2_, eps_;
    long t_ = 0;
};

}  // namespace signa
