#include <gtest/gtest.h>

#include <cmath>

#include "signa/gradcheck.hpp"
#include "signa/ops.hpp"
#include "signa/rng.hpp"

using namespace signa;

namespace {

Tensor random_tensor(Rng& rng, std::vector<int> shape) {
    std::vector<double> v(detail::shape_numel(shape));
    for (double& x : v) x = normal(rng);
    return Tensor(std::move(shape), std::move(v));
}

constexpr double kTol = 1e-4;

}  // namespace

TEST(FiniteDiff, ConstantFunctionHasZeroError) {
    Tensor x({4}, {1, 2, 3, 4});
    double err = finite_diff_check(
        [](DiffGraph& g, const Tensor&) {
            return sum_all(g, Tensor({1}, {3.25}));
        },
        x);
    EXPECT_EQ(err, 0.0);
}

TEST(FiniteDiff, RejectsNonScalarFunction) {
    Tensor x({2}, {1, 2});
    EXPECT_THROW(finite_diff_check([](DiffGraph& g, const Tensor& t) { return mul(g, t, t); }, x),
                 NumericError);
}

TEST(FiniteDiff, MatmulThenSum) {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor(rng, {3, 3});
        Tensor b = random_tensor(rng, {3, 3});
        double err = finite_diff_check(
            [b](DiffGraph& g, const Tensor& t) { return sum_all(g, matmul(g, t, b)); }, x);
        EXPECT_LT(err, kTol);
        Tensor a = random_tensor(rng, {3, 3});
        err = finite_diff_check(
            [a](DiffGraph& g, const Tensor& t) { return sum_all(g, matmul(g, a, t)); }, x);
        EXPECT_LT(err, kTol);
    }
}

TEST(FiniteDiff, SoftmaxWeightedSum) {
    Rng rng(102);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor(rng, {3, 4});
        Tensor w = random_tensor(rng, {3, 4});
        double err = finite_diff_check(
            [w](DiffGraph& g, const Tensor& t) {
                return sum_all(g, mul(g, softmax_rows(g, t), w));
            },
            x);
        EXPECT_LT(err, kTol);
    }
}

TEST(FiniteDiff, MaskedSoftmaxWeightedSum) {
    Rng rng(103);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor(rng, {4, 4});
        Tensor w = random_tensor(rng, {4, 4});
        std::vector<std::uint8_t> mask(16, 0);
        for (int i = 0; i < 4; ++i) {
            mask[i * 4 + i] = 1;  // self always active
            for (int j = 0; j < 4; ++j)
                if (bernoulli(rng, 0.5)) mask[i * 4 + j] = 1;
        }
        double err = finite_diff_check(
            [w, mask](DiffGraph& g, const Tensor& t) {
                return sum_all(g, mul(g, masked_softmax_rows(g, t, mask), w));
            },
            x);
        EXPECT_LT(err, kTol);
    }
}

TEST(FiniteDiff, Activations) {
    Rng rng(104);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor(rng, {6});
        Tensor w = random_tensor(rng, {6});
        double err = finite_diff_check(
            [w](DiffGraph& g, const Tensor& t) {
                return sum_all(g, mul(g, leaky_relu(g, t, 0.01), w));
            },
            x);
        EXPECT_LT(err, kTol);
        err = finite_diff_check(
            [w](DiffGraph& g, const Tensor& t) { return sum_all(g, mul(g, sigmoid(g, t), w)); },
            x);
        EXPECT_LT(err, kTol);
    }
}

TEST(FiniteDiff, GlobalAvgPool) {
    Rng rng(105);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor(rng, {3, 2, 4});
        Tensor w = random_tensor(rng, {3});
        double err = finite_diff_check(
            [w](DiffGraph& g, const Tensor& t) {
                return sum_all(g, mul(g, global_avg_pool(g, t), w));
            },
            x);
        EXPECT_LT(err, kTol);
    }
}

TEST(FiniteDiff, Conv2dInputAndKernel) {
    Rng rng(106);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor(rng, {2, 5, 5});
        Tensor k = random_tensor(rng, {3, 2, 3, 3});
        Tensor w = random_tensor(rng, {3, 3, 3});
        double err = finite_diff_check(
            [k, w](DiffGraph& g, const Tensor& t) {
                return sum_all(g, mul(g, conv2d(g, t, k, 2, 1), w));
            },
            x);
        EXPECT_LT(err, kTol);
        err = finite_diff_check(
            [x, w](DiffGraph& g, const Tensor& t) {
                return sum_all(g, mul(g, conv2d(g, x, t, 2, 1), w));
            },
            k);
        EXPECT_LT(err, kTol);
    }
}

TEST(FiniteDiff, AffineAllArguments) {
    Rng rng(107);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor(rng, {4});
        Tensor a = random_tensor(rng, {3, 4});
        Tensor b = random_tensor(rng, {3});
        Tensor w = random_tensor(rng, {3});
        auto weighted = [w](DiffGraph& g, Tensor y) { return sum_all(g, mul(g, y, w)); };
        double err = finite_diff_check(
            [a, b, weighted](DiffGraph& g, const Tensor& t) {
                return weighted(g, affine(g, t, a, b));
            },
            x);
        EXPECT_LT(err, kTol);
        err = finite_diff_check(
            [x, b, weighted](DiffGraph& g, const Tensor& t) {
                return weighted(g, affine(g, x, t, b));
            },
            a);
        EXPECT_LT(err, kTol);
        err = finite_diff_check(
            [x, a, weighted](DiffGraph& g, const Tensor& t) {
                return weighted(g, affine(g, x, a, t));
            },
            b);
        EXPECT_LT(err, kTol);
    }
}

TEST(FiniteDiff, MatvecBothArguments) {
    Rng rng(108);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor m = random_tensor(rng, {3, 4});
        Tensor v = random_tensor(rng, {4});
        Tensor w = random_tensor(rng, {3});
        double err = finite_diff_check(
            [v, w](DiffGraph& g, const Tensor& t) {
                return sum_all(g, mul(g, matvec(g, t, v), w));
            },
            m);
        EXPECT_LT(err, kTol);
        err = finite_diff_check(
            [m, w](DiffGraph& g, const Tensor& t) {
                return sum_all(g, mul(g, matvec(g, m, t), w));
            },
            v);
        EXPECT_LT(err, kTol);
    }
}

TEST(FiniteDiff, ReshapeConcatStack) {
    Rng rng(109);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor(rng, {6});
        Tensor w = random_tensor(rng, {2, 3});
        double err = finite_diff_check(
            [w](DiffGraph& g, const Tensor& t) {
                return sum_all(g, mul(g, reshape(g, t, {2, 3}), w));
            },
            x);
        EXPECT_LT(err, kTol);

        Tensor other = random_tensor(rng, {3});
        Tensor wc = random_tensor(rng, {9});
        err = finite_diff_check(
            [other, wc](DiffGraph& g, const Tensor& t) {
                return sum_all(g, mul(g, concat(g, {t, other}), wc));
            },
            x);
        EXPECT_LT(err, kTol);
    }
}

TEST(FiniteDiff, SigmoidAffineComposite) {
    Rng rng(110);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor(rng, {5});
        Tensor a = random_tensor(rng, {4, 5});
        Tensor b = random_tensor(rng, {4});
        double err = finite_diff_check(
            [a, b](DiffGraph& g, const Tensor& t) {
                return sum_all(g, sigmoid(g, affine(g, t, a, b)));
            },
            x);
        EXPECT_LT(err, kTol);
    }
}
