#pragma once

#include <string>
#include <utility>
#include <vector>

#include "signa/embeddings.hpp"
#include "signa/label_graph.hpp"
#include "signa/ops.hpp"
#include "signa/rng.hpp"

namespace signa {

enum class GnnKind { Gcn, Sage, Gat };

inline std::string to_string(GnnKind kind) {
    switch (kind) {
        case GnnKind::Gcn: return "gcn";
        case GnnKind::Sage: return "sage";
        case GnnKind::Gat: return "gat";
    }
    return "?";
}

inline GnnKind parse_gnn_kind(const std::string& s) {
    if (s == "gcn") return GnnKind::Gcn;
    if (s == "sage") return GnnKind::Sage;
    if (s == "gat") return GnnKind::Gat;
    throw ConfigError("unknown GNN kind '" + s + "' (expected gcn|sage|gat)");
}

inline Tensor mat_to_tensor(const Mat& m, bool requires_grad = false) {
    return Tensor({m.rows, m.cols}, m.data, requires_grad);
}

/// One graph-convolution layer: δ(Ĝ·H·W), with δ = LeakyReLU on hidden
/// layers and the identity on the final layer.
inline Tensor gcn_layer(DiffGraph& g, const Tensor& h, const Tensor& ghat, const Tensor& w,
                        bool final, double slope = 0.01) {
    Tensor z = matmul(g, matmul(g, ghat, h), w);
    return final ? z : leaky_relu(g, z, slope);
}

namespace detail {

// Row-normalized neighbor averaging matrix: entry (i,j) is 1/|N(i)| when
// G_ij > 0, zero otherwise. Rows without neighbors stay zero.
inline Mat neighbor_mean_matrix(const Mat& g_adj) {
    Mat m(g_adj.rows, g_adj.cols);
    for (int i = 0; i < g_adj.rows; ++i) {
        int deg = 0;
        for (int j = 0; j < g_adj.cols; ++j)
            if (g_adj.at(i, j) > 0.0) ++deg;
        if (deg == 0) continue;
        const double inv = 1.0 / static_cast<double>(deg);
        for (int j = 0; j < g_adj.cols; ++j)
            if (g_adj.at(i, j) > 0.0) m.at(i, j) = inv;
    }
    return m;
}

// Attention mask: j participates in node i's softmax iff G_ij > 0 or j = i.
inline std::vector<std::uint8_t> attention_mask(const Mat& g_adj) {
    std::vector<std::uint8_t> mask(g_adj.data.size(), 0);
    for (int i = 0; i < g_adj.rows; ++i)
        for (int j = 0; j < g_adj.cols; ++j)
            if (i == j || g_adj.at(i, j) > 0.0)
                mask[static_cast<std::size_t>(i) * g_adj.cols + j] = 1;
    return mask;
}

}  // namespace detail

/// GraphSAGE layer with the mean aggregator:
/// δ(H·W_self + meanNeigh(H;G)·W_neigh). Neighbors of i are the j with
/// G_ij > 0; an empty neighborhood aggregates to the zero vector.
inline Tensor sage_layer(DiffGraph& g, const Tensor& h, const Mat& g_adj, const Tensor& w_self,
                         const Tensor& w_neigh, bool final, double slope = 0.01) {
    if (g_adj.rows != h.dim(0) || g_adj.rows != g_adj.cols)
        throw ShapeError("sage_layer: adjacency does not match node count");
    Tensor mean_mat = mat_to_tensor(detail::neighbor_mean_matrix(g_adj));
    Tensor self_part = matmul(g, h, w_self);
    Tensor neigh_part = matmul(g, matmul(g, mean_mat, h), w_neigh);
    Tensor z = add(g, self_part, neigh_part);
    return final ? z : leaky_relu(g, z, slope);
}

/// Single-head graph attention layer. Scores e_ij = LeakyReLU(aᵀ[Wh_i ‖ Wh_j])
/// over j ∈ neighbors(i) ∪ {i}, softmax over that set, output δ(Σ α_ij Wh_j).
inline Tensor gat_layer(DiffGraph& g, const Tensor& h, const Mat& g_adj, const Tensor& w,
                        const Tensor& attn, bool final, double slope = 0.01) {
    if (g_adj.rows != h.dim(0) || g_adj.rows != g_adj.cols)
        throw ShapeError("gat_layer: adjacency does not match node count");
    const int n = h.dim(0);
    const int dp = w.dim(1);
    if (attn.rank() != 1 || attn.dim(0) != 2 * dp)
        throw ShapeError("gat_layer: attention vector must have length 2*" +
                         std::to_string(dp) + ", got " + detail::shape_str(attn.shape()));
    Tensor hw = matmul(g, h, w);  // n x d'
    Tensor a_self = slice(g, attn, 0, dp);
    Tensor a_neigh = slice(g, attn, dp, dp);
    Tensor s_self = matvec(g, hw, a_self);    // n
    Tensor s_neigh = matvec(g, hw, a_neigh);  // n
    Tensor ones_row = Tensor::full({1, n}, 1.0);
    Tensor ones_col = Tensor::full({n, 1}, 1.0);
    // scores[i][j] = s_self[i] + s_neigh[j]
    Tensor scores = add(g, matmul(g, reshape(g, s_self, {n, 1}), ones_row),
                        matmul(g, ones_col, reshape(g, s_neigh, {1, n})));
    Tensor e = leaky_relu(g, scores, slope);
    Tensor alpha = masked_softmax_rows(g, e, detail::attention_mask(g_adj));
    Tensor z = matmul(g, alpha, hw);
    return final ? z : leaky_relu(g, z, slope);
}

/// Two stacked GNN layers mapping label word embeddings to the semantic
/// feature matrix L_s ∈ R^{C×D}; widths d_in -> ⌊D/2⌋ -> D.
class SemanticEncoder {
public:
    SemanticEncoder() = default;

    SemanticEncoder(const EmbeddingMatrix& emb, const LabelGraph& graph, GnnKind kind,
                    int out_dim, Rng& rng, double slope = 0.01)
        : kind_(kind), slope_(slope), out_dim_(out_dim) {
        if (out_dim < 2) throw ConfigError("semantic encoder: output width must be >= 2");
        if (emb.matrix.rows != graph.label_count())
            throw ShapeError("semantic encoder: embedding rows do not match label count");
        hidden_dim_ = out_dim / 2;
        input_dim_ = emb.matrix.cols;
        emb_ = mat_to_tensor(emb.matrix);
        ghat_ = mat_to_tensor(graph.normalized);
        adjacency_ = graph.adjacency;
        switch (kind_) {
            case GnnKind::Gcn:
                add_param("gnn.l1.w", rng, {input_dim_, hidden_dim_}, input_dim_);
                add_param("gnn.l2.w", rng, {hidden_dim_, out_dim_}, hidden_dim_);
                break;
            case GnnKind::Sage:
                add_param("gnn.l1.w_self", rng, {input_dim_, hidden_dim_}, input_dim_);
                add_param("gnn.l1.w_neigh", rng, {input_dim_, hidden_dim_}, input_dim_);
                add_param("gnn.l2.w_self", rng, {hidden_dim_, out_dim_}, hidden_dim_);
                add_param("gnn.l2.w_neigh", rng, {hidden_dim_, out_dim_}, hidden_dim_);
                break;
            case GnnKind::Gat:
                add_param("gnn.l1.w", rng, {input_dim_, hidden_dim_}, input_dim_);
                add_param("gnn.l1.a", rng, {2 * hidden_dim_}, 2 * hidden_dim_);
                add_param("gnn.l2.w", rng, {hidden_dim_, out_dim_}, hidden_dim_);
                add_param("gnn.l2.a", rng, {2 * out_dim_}, 2 * out_dim_);
                break;
        }
    }

    /// Records the two-layer forward pass and returns L_s (C×D).
    Tensor encode(DiffGraph& g) const {
        switch (kind_) {
            case GnnKind::Gcn: {
                Tensor h1 = gcn_layer(g, emb_, ghat_, param(0), false, slope_);
                return gcn_layer(g, h1, ghat_, param(1), true, slope_);
            }
            case GnnKind::Sage: {
                Tensor h1 = sage_layer(g, emb_, adjacency_, param(0), param(1), false, slope_);
                return sage_layer(g, h1, adjacency_, param(2), param(3), true, slope_);
            }
            case GnnKind::Gat: {
                Tensor h1 = gat_layer(g, emb_, adjacency_, param(0), param(1), false, slope_);
                return gat_layer(g, h1, adjacency_, param(2), param(3), true, slope_);
            }
        }
        throw ConfigError("semantic encoder: invalid kind");
    }

    GnnKind kind() const { return kind_; }
    int output_dim() const { return out_dim_; }
    int label_count() const { return emb_.dim(0); }
    const std::vector<std::pair<std::string, Tensor>>& named_params() const { return params_; }

private:
    void add_param(std::string name, Rng& rng, std::vector<int> shape, int fan_in) {
        params_.emplace_back(std::move(name), init_uniform(rng, std::move(shape), fan_in));
    }
    const Tensor& param(std::size_t i) const { return params_[i].second; }

    GnnKind kind_ = GnnKind::Sage;
    double slope_ = 0.01;
    int input_dim_ = 0, hidden_dim_ = 0, out_dim_ = 0;
    Tensor emb_;
    Tensor ghat_;
    Mat adjacency_;
    std::vector<std::pair<std::string, Tensor>> params_;
};

/// The semantic feature matrix L_s with its channel width.
struct SemanticFeatures {
    Tensor l_s;  // C x D
    int channel_dim = 0;
};

/// One-shot encoding with freshly initialized parameters.
inline SemanticFeatures encode_semantics(const EmbeddingMatrix& emb, const LabelGraph& graph,
                                         GnnKind kind, int out_dim, Rng& rng) {
    SemanticEncoder enc(emb, graph, kind, out_dim, rng);
    DiffGraph g;
    return SemanticFeatures{enc.encode(g), out_dim};
}

}  // namespace signa
