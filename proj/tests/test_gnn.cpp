#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "signa/gnn.hpp"
#include "signa/gradcheck.hpp"

using namespace signa;

namespace {

using Grid = std::vector<std::vector<double>>;

Grid to_grid(const Tensor& t) {
    Grid g(static_cast<std::size_t>(t.dim(0)),
           std::vector<double>(static_cast<std::size_t>(t.dim(1))));
    for (int i = 0; i < t.dim(0); ++i)
        for (int j = 0; j < t.dim(1); ++j) g[i][j] = t.at(i, j);
    return g;
}

Grid grid_mul(const Grid& a, const Grid& b) {
    Grid out(a.size(), std::vector<double>(b[0].size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b[0].size(); ++j)
            for (std::size_t k = 0; k < b.size(); ++k) out[i][j] += a[i][k] * b[k][j];
    return out;
}

double lrelu(double x, double slope) { return x >= 0 ? x : slope * x; }

Tensor random_tensor(Rng& rng, std::vector<int> shape, bool rg = false) {
    std::vector<double> v(detail::shape_numel(shape));
    for (double& x : v) x = normal(rng);
    return Tensor(std::move(shape), std::move(v), rg);
}

Mat random_adjacency(Rng& rng, int n, double density) {
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (bernoulli(rng, density)) g.at(i, j) = uniform(rng, 0.4, 1.0);
    return g;
}

LabelGraph graph_from_adjacency(const Mat& adj) {
    LabelGraph g;
    g.labels.assign(static_cast<std::size_t>(adj.rows), "l");
    g.counts = Mat(adj.rows, adj.cols);
    g.prob = adj;
    g.adjacency = adj;
    g.normalized = normalize_adjacency(adj);
    return g;
}

}  // namespace

TEST(GcnLayer, IdentityPropagation) {
    DiffGraph g;
    Tensor h({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor eye({2, 2}, {1, 0, 0, 1});
    Tensor w({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Tensor out = gcn_layer(g, h, eye, w, false);
    EXPECT_EQ(out.values(), h.values());  // nonnegative H passes LeakyReLU unchanged

    Tensor hneg({1, 1}, {-1.0});
    Tensor one({1, 1}, {1.0});
    DiffGraph g2;
    Tensor out2 = gcn_layer(g2, hneg, one, one, false, 0.01);
    EXPECT_EQ(out2[0], -0.01);
    DiffGraph g3;
    Tensor out3 = gcn_layer(g3, hneg, one, one, true, 0.01);
    EXPECT_EQ(out3[0], -1.0);  // final layer keeps identity activation
}

TEST(GcnLayer, MatchesDenseOracle) {
    Rng rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const int d = 2 + static_cast<int>(rng() % 3);
        const int dp = 2 + static_cast<int>(rng() % 3);
        Mat adj = random_adjacency(rng, n, 0.5);
        Mat ghat = normalize_adjacency(adj);
        Tensor h = random_tensor(rng, {n, d});
        Tensor w = random_tensor(rng, {d, dp});
        DiffGraph g;
        Tensor out = gcn_layer(g, h, mat_to_tensor(ghat), w, false, 0.01);

        Grid gh(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gh[i][j] = ghat.at(i, j);
        Grid want = grid_mul(grid_mul(gh, to_grid(h)), to_grid(w));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < dp; ++j)
                EXPECT_NEAR(out.at(i, j), lrelu(want[i][j], 0.01), 1e-10);
    }
}

TEST(SageLayer, EmptyNeighborhoodsUseSelfOnly) {
    DiffGraph g;
    Tensor h({2, 2}, {1, 2, 3, 4});
    Mat edgeless(2, 2);
    Tensor wself({2, 2}, {1, 0, 0, 1});
    Tensor wneigh({2, 2}, {5, 5, 5, 5});
    Tensor out = sage_layer(g, h, edgeless, wself, wneigh, true);
    EXPECT_EQ(out.values(), h.values());
}

TEST(SageLayer, MutualNeighborsSwapFeatures) {
    DiffGraph g;
    Tensor h({2, 2}, {1, 2, 3, 4});
    Mat ring(2, 2, {0, 1, 1, 0});
    Tensor wself({2, 2}, {0, 0, 0, 0});
    Tensor eye({2, 2}, {1, 0, 0, 1});
    Tensor out = sage_layer(g, h, ring, wself, eye, true);
    EXPECT_EQ(out.values(), (std::vector<double>{3, 4, 1, 2}));
}

TEST(SageLayer, MatchesDenseOracle) {
    Rng rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const int d = 2 + static_cast<int>(rng() % 3);
        const int dp = 2 + static_cast<int>(rng() % 3);
        Mat adj = random_adjacency(rng, n, 0.4);
        Tensor h = random_tensor(rng, {n, d});
        Tensor wself = random_tensor(rng, {d, dp});
        Tensor wneigh = random_tensor(rng, {d, dp});
        DiffGraph g;
        Tensor out = sage_layer(g, h, adj, wself, wneigh, false, 0.01);

        for (int i = 0; i < n; ++i) {
            std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
            int deg = 0;
            for (int j = 0; j < n; ++j)
                if (adj.at(i, j) > 0.0) {
                    ++deg;
                    for (int k = 0; k < d; ++k) mean[static_cast<std::size_t>(k)] += h.at(j, k);
                }
            if (deg > 0)
                for (double& v : mean) v /= deg;
            for (int j = 0; j < dp; ++j) {
                double z = 0.0;
                for (int k = 0; k < d; ++k)
                    z += h.at(i, k) * wself.at(k, j) + mean[static_cast<std::size_t>(k)] * wneigh.at(k, j);
                EXPECT_NEAR(out.at(i, j), lrelu(z, 0.01), 1e-10);
            }
        }
    }
}

TEST(GatLayer, EdgelessReducesToSelfAttention) {
    Rng rng(23);
    const int n = 3, d = 2, dp = 2;
    Tensor h = random_tensor(rng, {n, d});
    Tensor w = random_tensor(rng, {d, dp});
    Tensor a = random_tensor(rng, {2 * dp});
    Mat edgeless(n, n);
    DiffGraph g;
    Tensor out = gat_layer(g, h, edgeless, w, a, true);
    // alpha_ii = 1, so output row i equals W^T h_i
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dp; ++j) {
            double want = 0.0;
            for (int k = 0; k < d; ++k) want += h.at(i, k) * w.at(k, j);
            EXPECT_NEAR(out.at(i, j), want, 1e-12);
        }
}

TEST(GatLayer, MatchesDenseOracle) {
    Rng rng(24);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const int d = 2 + static_cast<int>(rng() % 3);
        const int dp = 2 + static_cast<int>(rng() % 3);
        Mat adj = random_adjacency(rng, n, 0.4);
        Tensor h = random_tensor(rng, {n, d});
        Tensor w = random_tensor(rng, {d, dp});
        Tensor a = random_tensor(rng, {2 * dp});
        const double slope = 0.01;
        DiffGraph g;
        Tensor out = gat_layer(g, h, adj, w, a, false, slope);

        Grid hw = grid_mul(to_grid(h), to_grid(w));
        for (int i = 0; i < n; ++i) {
            // attention over neighbors(i) ∪ {i}
            std::vector<double> weights(static_cast<std::size_t>(n), 0.0);
            double denom = 0.0;
            std::vector<double> scores(static_cast<std::size_t>(n), 0.0);
            std::vector<bool> active(static_cast<std::size_t>(n), false);
            for (int j = 0; j < n; ++j) {
                if (!(i == j || adj.at(i, j) > 0.0)) continue;
                active[static_cast<std::size_t>(j)] = true;
                double e = 0.0;
                for (int k = 0; k < dp; ++k)
                    e += a[static_cast<std::size_t>(k)] * hw[i][k] +
                         a[static_cast<std::size_t>(dp + k)] * hw[j][k];
                scores[static_cast<std::size_t>(j)] = lrelu(e, slope);
            }
            double alpha_sum = 0.0;
            for (int j = 0; j < n; ++j)
                if (active[static_cast<std::size_t>(j)]) {
                    weights[static_cast<std::size_t>(j)] =
                        std::exp(scores[static_cast<std::size_t>(j)]);
                    denom += weights[static_cast<std::size_t>(j)];
                }
            for (int j = 0; j < n; ++j) weights[static_cast<std::size_t>(j)] /= denom;
            for (int j = 0; j < n; ++j) alpha_sum += weights[static_cast<std::size_t>(j)];
            EXPECT_NEAR(alpha_sum, 1.0, 1e-9);  // coefficients per node sum to 1

            for (int k = 0; k < dp; ++k) {
                double z = 0.0;
                for (int j = 0; j < n; ++j) z += weights[static_cast<std::size_t>(j)] * hw[j][k];
                EXPECT_NEAR(out.at(i, k), lrelu(z, slope), 1e-10);
            }
        }
    }
}

TEST(EncodeSemantics, ShapeContract) {
    Rng rng(31);
    Mat adj = random_adjacency(rng, 3, 0.5);
    LabelGraph graph = graph_from_adjacency(adj);
    EmbeddingMatrix emb = synthetic_embeddings(5, 3, 4);
    for (GnnKind kind : {GnnKind::Gcn, GnnKind::Sage, GnnKind::Gat}) {
        SemanticFeatures feats = encode_semantics(emb, graph, kind, 8, rng);
        EXPECT_EQ(feats.l_s.shape(), (std::vector<int>{3, 8}));
    }
    EXPECT_THROW(encode_semantics(emb, graph, GnnKind::Gcn, 1, rng), ConfigError);
}

TEST(EncodeSemantics, GcnOnIsolatedNodesIsPerNodeAffine) {
    // Ĝ = I when the thresholded graph is edgeless
    LabelGraph graph = graph_from_adjacency(Mat(3, 3));
    EXPECT_EQ(graph.normalized, Mat::identity(3));
    EmbeddingMatrix emb = synthetic_embeddings(6, 3, 4);
    Rng rng(8);
    SemanticEncoder enc(emb, graph, GnnKind::Gcn, 6, rng);
    DiffGraph g;
    Tensor ls = enc.encode(g);

    const Tensor& w1 = enc.named_params()[0].second;
    const Tensor& w2 = enc.named_params()[1].second;
    for (int node = 0; node < 3; ++node)
        for (int j = 0; j < 6; ++j) {
            double h1[3];  // hidden width 3
            for (int k = 0; k < 3; ++k) {
                double z = 0.0;
                for (int m = 0; m < 4; ++m) z += emb.matrix.at(node, m) * w1.at(m, k);
                h1[k] = lrelu(z, 0.01);
            }
            double z2 = 0.0;
            for (int k = 0; k < 3; ++k) z2 += h1[k] * w2.at(k, j);
            EXPECT_NEAR(ls.at(node, j), z2, 1e-12);
        }
}

TEST(EncodeSemantics, GradientsMatchFiniteDifferences) {
    Rng rng(33);
    Mat adj = random_adjacency(rng, 4, 0.5);
    LabelGraph graph = graph_from_adjacency(adj);
    EmbeddingMatrix emb = synthetic_embeddings(11, 4, 5);
    for (GnnKind kind : {GnnKind::Gcn, GnnKind::Sage, GnnKind::Gat}) {
        SemanticEncoder enc(emb, graph, kind, 6, rng);
        Tensor weight = random_tensor(rng, {4, 6});
        for (const auto& [name, param] : enc.named_params()) {
            double err = finite_diff_check(
                [&enc, weight](DiffGraph& g, const Tensor&) {
                    return sum_all(g, mul(g, enc.encode(g), weight));
                },
                param);
            EXPECT_LT(err, 1e-4) << to_string(kind) << " param " << name;
        }
    }
}
