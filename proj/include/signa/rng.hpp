#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "signa/tensor.hpp"

namespace signa {

using Rng = std::mt19937_64;

/// splitmix64 step; used to derive independent stream seeds from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng);
}

inline double normal(Rng& rng, double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> dist(mean, stddev);
    return dist(rng);
}

inline bool bernoulli(Rng& rng, double p) {
    std::bernoulli_distribution dist(p);
    return dist(rng);
}

/// Tensor with entries uniform in ±sqrt(1/fan_in); the project-wide
/// scale-preserving parameter initializer.
inline Tensor init_uniform(Rng& rng, std::vector<int> shape, int fan_in,
                           bool requires_grad = true) {
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::vector<double> v(detail::shape_numel(shape));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& x : v) x = dist(rng);
    return Tensor(std::move(shape), std::move(v), requires_grad);
}

/// Fisher-Yates shuffle driven by the given engine.
template <typename T>
void shuffle(Rng& rng, std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> dist(0, i - 1);
        std::swap(items[i - 1], items[dist(rng)]);
    }
}

}  // namespace signa
