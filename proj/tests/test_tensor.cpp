#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "signa/ops.hpp"
#include "signa/rng.hpp"

using namespace signa;

namespace {

// Independent triple-loop product used as the matmul oracle.
std::vector<double> matmul_oracle(const std::vector<double>& a, int m, int k,
                                  const std::vector<double>& b, int n) {
    std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            for (int kk = 0; kk < k; ++kk)
                out[i * n + j] += a[i * k + kk] * b[kk * n + j];
    return out;
}

Tensor random_tensor(Rng& rng, std::vector<int> shape, bool rg = false) {
    std::vector<double> v(detail::shape_numel(shape));
    for (double& x : v) x = normal(rng);
    return Tensor(std::move(shape), std::move(v), rg);
}

}  // namespace

TEST(Tensor, InvariantsOnConstruction) {
    Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
    EXPECT_EQ(t.size(), 6u);
    EXPECT_EQ(t.grad().size(), 6u);
    for (double g : t.grad()) EXPECT_EQ(g, 0.0);
    EXPECT_THROW(Tensor({2, 2}, {1, 2, 3}), ShapeError);
    EXPECT_THROW(Tensor({0, 2}, {}), ShapeError);
}

TEST(Tensor, ZeroGradResets) {
    Tensor t({2}, {1, 2}, true);
    t.grad()[0] = 5.0;
    t.zero_grad();
    EXPECT_EQ(t.grad()[0], 0.0);
    EXPECT_EQ(t.grad()[1], 0.0);
}

TEST(Matmul, IdentityCase) {
    DiffGraph g;
    Tensor a({2, 2}, {1, 2, 3, 4});
    Tensor eye({2, 2}, {1, 0, 0, 1});
    Tensor out = matmul(g, a, eye);
    EXPECT_EQ(out.values(), a.values());
}

TEST(Matmul, MatchesTripleLoopOracle) {
    DiffGraph g;
    Tensor a({2, 2}, {1, 2, 3, 4});
    Tensor b({2, 1}, {5, 6});
    Tensor out = matmul(g, a, b);
    EXPECT_EQ(out.values(), (std::vector<double>{17, 39}));

    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 1 + trial % 4, k = 1 + (trial * 3) % 5, n = 1 + (trial * 7) % 4;
        Tensor x = random_tensor(rng, {m, k});
        Tensor y = random_tensor(rng, {k, n});
        DiffGraph g2;
        Tensor z = matmul(g2, x, y);
        std::vector<double> want = matmul_oracle(x.values(), m, k, y.values(), n);
        for (std::size_t i = 0; i < want.size(); ++i)
            EXPECT_NEAR(z.values()[i], want[i], 1e-12);
    }
}

TEST(Matmul, BackwardAgainstHandCase) {
    DiffGraph g;
    Tensor a({1, 2}, {1, 2}, true);
    Tensor b({2, 1}, {3, 4});
    Tensor out = matmul(g, a, b);
    reverse_pass(g, Tensor({1, 1}, {1}));
    EXPECT_EQ(a.grad(), (std::vector<double>{3, 4}));
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
    DiffGraph g;
    Tensor a({2, 3}, std::vector<double>(6, 0.0));
    Tensor b({2, 2}, std::vector<double>(4, 0.0));
    try {
        matmul(g, a, b);
        FAIL() << "expected ShapeError";
    } catch (const ShapeError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("[2x3]"), std::string::npos);
        EXPECT_NE(msg.find("[2x2]"), std::string::npos);
    }
}

TEST(SoftmaxRows, UniformAndExactCases) {
    DiffGraph g;
    Tensor m({2, 3}, {0, 0, 0, std::log(2.0), 0, 0});
    Tensor out = softmax_rows(g, m);
    EXPECT_NEAR(out.at(0, 0), 1.0 / 3, 1e-15);
    EXPECT_NEAR(out.at(0, 1), 1.0 / 3, 1e-15);
    EXPECT_NEAR(out.at(1, 0), 0.5, 1e-12);
    EXPECT_NEAR(out.at(1, 1), 0.25, 1e-12);
    EXPECT_NEAR(out.at(1, 2), 0.25, 1e-12);
}

TEST(SoftmaxRows, RowsSumToOneAndShiftInvariance) {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        Tensor m = random_tensor(rng, {4, 6});
        DiffGraph g;
        Tensor out = softmax_rows(g, m);
        for (int i = 0; i < 4; ++i) {
            double sum = 0.0;
            for (int j = 0; j < 6; ++j) {
                EXPECT_GT(out.at(i, j), 0.0);
                EXPECT_LT(out.at(i, j), 1.0);
                sum += out.at(i, j);
            }
            EXPECT_NEAR(sum, 1.0, 1e-9);
        }
        const double shift = uniform(rng, -3.0, 3.0);
        Tensor shifted = m.clone();
        for (double& v : shifted.values()) v += shift;
        DiffGraph g2;
        Tensor out2 = softmax_rows(g2, shifted);
        for (std::size_t i = 0; i < out.size(); ++i)
            EXPECT_NEAR(out.values()[i], out2.values()[i], 1e-12);
    }
}

TEST(SoftmaxRows, RejectsNonFinite) {
    DiffGraph g;
    Tensor m({1, 2}, {1.0, std::numeric_limits<double>::infinity()});
    EXPECT_THROW(softmax_rows(g, m), NumericError);
}

TEST(Activation, PointCases) {
    DiffGraph g;
    Tensor x({3}, {5.0, -2.0, 0.0});
    Tensor lr = leaky_relu(g, x, 0.01);
    EXPECT_EQ(lr[0], 5.0);
    EXPECT_EQ(lr[1], -0.02);
    Tensor s = sigmoid(g, Tensor({1}, {0.0}));
    EXPECT_EQ(s[0], 0.5);
    EXPECT_THROW(leaky_relu(g, x, 0.0), ConfigError);
}

TEST(Activation, SigmoidStableAtExtremes) {
    DiffGraph g;
    Tensor x({3}, {750.0, -700.0, -750.0});
    Tensor s = sigmoid(g, x);
    EXPECT_EQ(s[0], 1.0);
    EXPECT_GT(s[1], 0.0);
    EXPECT_LT(s[1], 1e-300);
    EXPECT_TRUE(std::isfinite(s[2]));  // underflows to 0, never NaN
}

TEST(GlobalAvgPool, MeanOracleAndBounds) {
    DiffGraph g;
    Tensor f({1, 2, 2}, {1, 2, 3, 4});
    Tensor z = global_avg_pool(g, f);
    EXPECT_EQ(z[0], 2.5);

    Tensor c = Tensor::full({3, 4, 5}, 7.25);
    DiffGraph g2;
    Tensor zc = global_avg_pool(g2, c);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(zc[i], 7.25);

    // degenerate pooling is the identity on the channel vector
    Tensor one({2, 1, 1}, {3.0, -1.5});
    DiffGraph g3;
    Tensor zi = global_avg_pool(g3, one);
    EXPECT_EQ(zi.values(), one.values());

    Rng rng(3);
    Tensor r = random_tensor(rng, {2, 3, 3});
    DiffGraph g4;
    Tensor zr = global_avg_pool(g4, r);
    for (int ch = 0; ch < 2; ++ch) {
        double lo = r.at(ch, 0, 0), hi = lo;
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 3; ++x) {
                lo = std::min(lo, r.at(ch, y, x));
                hi = std::max(hi, r.at(ch, y, x));
            }
        EXPECT_GE(zr[ch], lo);
        EXPECT_LE(zr[ch], hi);
    }

    EXPECT_THROW(global_avg_pool(g, Tensor({2, 2}, {1, 2, 3, 4})), ShapeError);
}

TEST(Conv2d, IdentityKernel) {
    DiffGraph g;
    Rng rng(7);
    Tensor x = random_tensor(rng, {1, 4, 4});
    Tensor k({1, 1, 1, 1}, {1.0});
    Tensor out = conv2d(g, x, k, 1, 0);
    EXPECT_EQ(out.values(), x.values());
}

TEST(Conv2d, OnesKernelOnOnesInput) {
    DiffGraph g;
    Tensor x = Tensor::full({1, 5, 5}, 1.0);
    Tensor k = Tensor::full({1, 1, 3, 3}, 1.0);
    Tensor out = conv2d(g, x, k, 1, 0);
    ASSERT_EQ(out.shape(), (std::vector<int>{1, 3, 3}));
    EXPECT_EQ(out.at(0, 1, 1), 9.0);
}

TEST(Conv2d, OutputShapeFormula) {
    DiffGraph g;
    Tensor x = Tensor::zeros({2, 8, 8});
    Tensor k = Tensor::zeros({3, 2, 3, 3});
    Tensor out = conv2d(g, x, k, 2, 1);
    EXPECT_EQ(out.shape(), (std::vector<int>{3, 4, 4}));
}

TEST(Conv2d, MatchesDirectOracle) {
    Rng rng(19);
    Tensor x = random_tensor(rng, {2, 5, 6});
    Tensor k = random_tensor(rng, {3, 2, 3, 2});
    const int stride = 2, pad = 1;
    DiffGraph g;
    Tensor out = conv2d(g, x, k, stride, pad);

    const int oh = out.dim(1), ow = out.dim(2);
    for (int co = 0; co < 3; ++co)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double want = 0.0;
                for (int ci = 0; ci < 2; ++ci)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 2; ++kx) {
                            int iy = oy * stride - pad + ky;
                            int ix = ox * stride - pad + kx;
                            if (iy < 0 || iy >= 5 || ix < 0 || ix >= 6) continue;
                            want += x.at(ci, iy, ix) * k.values()[((co * 2 + ci) * 3 + ky) * 2 + kx];
                        }
                EXPECT_NEAR(out.at(co, oy, ox), want, 1e-12);
            }
}

TEST(Conv2d, KernelLargerThanPaddedInput) {
    DiffGraph g;
    Tensor x = Tensor::zeros({1, 2, 2});
    Tensor k = Tensor::zeros({1, 1, 5, 5});
    EXPECT_THROW(conv2d(g, x, k, 1, 0), ShapeError);
    // pad 2 makes it fit: 2 + 4 >= 5
    EXPECT_NO_THROW(conv2d(g, x, k, 1, 2));
}

TEST(Affine, HandCases) {
    DiffGraph g;
    Tensor x({2}, {1, 2});
    Tensor eye({2, 2}, {1, 0, 0, 1});
    Tensor zero({2}, {0, 0});
    EXPECT_EQ(affine(g, x, eye, zero).values(), x.values());

    Tensor zeromap({2, 2}, {0, 0, 0, 0});
    Tensor b({2}, {4, -1});
    EXPECT_EQ(affine(g, x, zeromap, b).values(), b.values());

    Tensor a({2, 2}, {1, 1, 0, 2});
    Tensor b2({2}, {0, 1});
    EXPECT_EQ(affine(g, x, a, b2).values(), (std::vector<double>{3, 5}));
}

TEST(ReversePass, NoRequiresGradLeavesZeros) {
    DiffGraph g;
    Tensor x({3}, {1, 2, 3});
    Tensor y = sum_all(g, mul(g, x, x));
    reverse_pass(g, Tensor::scalar(1.0));
    for (double v : x.grad()) EXPECT_EQ(v, 0.0);
}

TEST(ReversePass, SumOfSquaresGradient) {
    DiffGraph g;
    Tensor x({3}, {1.0, -2.0, 0.5}, true);
    Tensor y = sum_all(g, mul(g, x, x));
    EXPECT_EQ(y[0], 1.0 + 4.0 + 0.25);
    reverse_pass(g, Tensor::scalar(1.0));
    EXPECT_NEAR(x.grad()[0], 2.0, 1e-12);
    EXPECT_NEAR(x.grad()[1], -4.0, 1e-12);
    EXPECT_NEAR(x.grad()[2], 1.0, 1e-12);
}

TEST(ReversePass, AccumulationContractDoublesGrads) {
    DiffGraph g;
    Tensor x({3}, {1.0, -2.0, 0.5}, true);
    Tensor y = sum_all(g, mul(g, x, x));
    reverse_pass(g, Tensor::scalar(1.0));
    std::vector<double> once = x.grad();
    reverse_pass(g, Tensor::scalar(1.0));
    for (std::size_t i = 0; i < once.size(); ++i)
        EXPECT_EQ(x.grad()[i], 2.0 * once[i]);
}

TEST(ReversePass, Errors) {
    DiffGraph g;
    EXPECT_THROW(reverse_pass(g, Tensor::scalar(1.0)), GraphError);
    Tensor x({2}, {1, 2}, true);
    Tensor y = sum_all(g, x);
    EXPECT_THROW(reverse_pass(g, Tensor({2}, {1, 1})), ShapeError);
}

TEST(DiffGraph, ReplayReproducesBitwise) {
    Rng rng(23);
    Tensor x = random_tensor(rng, {3, 3}, true);
    Tensor w = random_tensor(rng, {3, 3}, true);
    DiffGraph g;
    Tensor h = leaky_relu(g, matmul(g, x, w));
    Tensor y = sum_all(g, softmax_rows(g, h));
    std::vector<double> h_saved = h.values(), y_saved = y.values();
    // scribble over outputs, then replay
    for (double& v : h.values()) v = -99.0;
    for (double& v : y.values()) v = -99.0;
    g.replay_forward();
    EXPECT_EQ(h.values(), h_saved);
    EXPECT_EQ(y.values(), y_saved);
}

TEST(DiffGraph, DeterministicAcrossRuns) {
    auto run = [] {
        Rng rng(99);
        Tensor x = random_tensor(rng, {4, 4}, true);
        Tensor k = random_tensor(rng, {2, 4, 3, 3});
        DiffGraph g;
        Tensor f = conv2d(g, reshape(g, x, {1, 4, 4}),
                          Tensor({2, 1, 3, 3}, std::vector<double>(k.values().begin(),
                                                                   k.values().begin() + 18)),
                          1, 1);
        Tensor y = sum_all(g, f);
        return y[0];
    };
    double a = run(), b = run();
    EXPECT_EQ(a, b);
}

TEST(ConcatAndStack, RoutesValuesAndGrads) {
    DiffGraph g;
    Tensor a({2}, {1, 2}, true);
    Tensor b({3}, {3, 4, 5}, true);
    Tensor c = concat(g, {a, b});
    EXPECT_EQ(c.values(), (std::vector<double>{1, 2, 3, 4, 5}));
    Tensor s = sum_all(g, c);
    reverse_pass(g, Tensor::scalar(1.0));
    EXPECT_EQ(a.grad(), (std::vector<double>{1, 1}));
    EXPECT_EQ(b.grad(), (std::vector<double>{1, 1, 1}));

    DiffGraph g2;
    Tensor r1({2}, {1, 2}, true);
    Tensor r2({2}, {3, 4}, true);
    Tensor m = stack_rows(g2, {r1, r2});
    EXPECT_EQ(m.shape(), (std::vector<int>{2, 2}));
    EXPECT_EQ(m.values(), (std::vector<double>{1, 2, 3, 4}));
}

TEST(StableDot, PermutationInvariantBitwise) {
    Rng rng(31);
    const int n = 17;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a[i] = normal(rng) * std::pow(10.0, static_cast<int>(uniform(rng, -8, 8)));
        b[i] = normal(rng);
    }
    const double base = detail::stable_dot(a.data(), 1, b.data(), 1, n);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int trial = 0; trial < 50; ++trial) {
        shuffle(rng, perm);
        std::vector<double> ap(n), bp(n);
        for (int i = 0; i < n; ++i) {
            ap[i] = a[perm[i]];
            bp[i] = b[perm[i]];
        }
        EXPECT_EQ(detail::stable_dot(ap.data(), 1, bp.data(), 1, n), base);
    }
}
