#pragma once

#include <string>
#include <utility>
#include <vector>

#include "signa/gnn.hpp"
#include "signa/ops.hpp"
#include "signa/rng.hpp"

namespace signa {

enum class GateMode { Sigmoid, Linear };

inline std::string to_string(GateMode m) { return m == GateMode::Sigmoid ? "sigmoid" : "linear"; }

inline GateMode parse_gate_mode(const std::string& s) {
    if (s == "sigmoid") return GateMode::Sigmoid;
    if (s == "linear") return GateMode::Linear;
    throw ConfigError("unknown gate mode '" + s + "' (expected sigmoid|linear)");
}

/// Operating point of the attention block. Defaults follow the reference
/// configuration: 6 heads, insertion after stage 2, GraphSAGE encoder,
/// threshold 0.4, sigmoid-gated residual weighting.
struct SignaConfig {
    int heads = 6;
    int insertion_layer = 2;  // 1..4
    GnnKind gnn = GnnKind::Sage;
    double q = 0.4;
    int channel_dim = 0;  // D, channels of the insertion layer
    int label_count = 0;  // C
    GateMode gate_mode = GateMode::Sigmoid;
    bool residual = true;

    void validate() const {
        if (heads < 1) throw ConfigError("signa: head count must be >= 1");
        if (insertion_layer < 1 || insertion_layer > 4)
            throw ConfigError("signa: insertion layer must be in 1..4");
        if (channel_dim < 2) throw ConfigError("signa: channel dim must be >= 2");
        if (label_count < 1) throw ConfigError("signa: label count must be >= 1");
        if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("signa: Q must lie in [0,1]");
    }
};

/// Per-head learnables: the interleaving expansion A,b (Z -> Z_s) and the
/// channel-feature map V,c (Z -> Z_v).
struct SignaHeadParams {
    Tensor a;  // (D*C) x D
    Tensor b;  // D*C
    Tensor v;  // D x D
    Tensor c;  // D

    static SignaHeadParams init(Rng& rng, int label_count, int channel_dim) {
        SignaHeadParams p;
        p.a = init_uniform(rng, {channel_dim * label_count, channel_dim}, channel_dim);
        p.b = init_uniform(rng, {channel_dim * label_count}, channel_dim);
        p.v = init_uniform(rng, {channel_dim, channel_dim}, channel_dim);
        p.c = init_uniform(rng, {channel_dim}, channel_dim);
        return p;
    }
};

/// Fusion learnables mapping the N concatenated head outputs to one
/// weighting vector.
struct FuseParams {
    Tensor f;  // D x (N*D)
    Tensor g;  // D

    static FuseParams init(Rng& rng, int heads, int channel_dim) {
        FuseParams p;
        p.f = init_uniform(rng, {channel_dim, heads * channel_dim}, heads * channel_dim);
        p.g = init_uniform(rng, {channel_dim}, heads * channel_dim);
        return p;
    }
};

/// Z = spatial mean of each channel of a D×w×h feature map.
inline Tensor squeeze_channels(DiffGraph& g, const Tensor& f) { return global_avg_pool(g, f); }

/// Z_s·L_s with a permutation-invariant inner product, so relabeling the
/// C axis of both operands leaves the result bit-identical.
inline Tensor interleave_logits(DiffGraph& g, const Tensor& z_s, const Tensor& l_s) {
    if (z_s.rank() != 2 || l_s.rank() != 2 || z_s.dim(1) != l_s.dim(0))
        throw ShapeError("interleave_logits: incompatible shapes " +
                         detail::shape_str(z_s.shape()) + " and " +
                         detail::shape_str(l_s.shape()));
    const int d = z_s.dim(0), c = z_s.dim(1), w = l_s.dim(1);
    Tensor out = Tensor::zeros({d, w}, z_s.requires_grad() || l_s.requires_grad());
    auto run = [z_s, l_s, out, d, c, w] {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < w; ++j)
                out.at(i, j) = detail::stable_dot(z_s.values().data() + static_cast<std::size_t>(i) * c,
                                                  1, l_s.values().data() + j, w, c);
    };
    run();
    g.record(
        "interleave_logits", {z_s, l_s}, out, run,
        [z_s, l_s, out, d, c, w] {
            const std::vector<double>& go = out.grad();
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < w; ++j) {
                    const double gij = go[static_cast<std::size_t>(i) * w + j];
                    for (int k = 0; k < c; ++k) {
                        if (z_s.requires_grad())
                            z_s.grad()[static_cast<std::size_t>(i) * c + k] += gij * l_s.at(k, j);
                        if (l_s.requires_grad())
                            l_s.grad()[static_cast<std::size_t>(k) * w + j] += gij * z_s.at(i, k);
                    }
                }
        });
    return out;
}

/// Semantic interleaving: expand Z through A,b, reshape row-major into
/// Z_s ∈ R^{D×C}, multiply with L_s and normalize each row by softmax.
/// Every row of the result is a distribution over the D channels.
inline Tensor interleave(DiffGraph& g, const Tensor& z, const Tensor& l_s,
                         const SignaHeadParams& params) {
    const int d = z.dim(0);
    const int c = l_s.dim(0);
    if (params.a.dim(0) != d * c || params.a.dim(1) != d)
        throw ShapeError("interleave: A must be (D*C)x" + std::to_string(d) + ", got " +
                         detail::shape_str(params.a.shape()));
    Tensor expanded = affine(g, z, params.a, params.b);     // D*C
    Tensor z_s = reshape(g, expanded, {d, c});              // row-major: (d,c) = element d*C+c
    return softmax_rows(g, interleave_logits(g, z_s, l_s));
}

/// One attention head: Z_v = V·Z + c, then Z_w = M_s·Z_v. Each output
/// entry is a convex combination of Z_v entries.
inline Tensor attention_head(DiffGraph& g, const Tensor& z, const Tensor& l_s,
                             const SignaHeadParams& params) {
    Tensor m_s = interleave(g, z, l_s, params);
    Tensor z_v = affine(g, z, params.v, params.c);
    return matvec(g, m_s, z_v);
}

/// Concatenates the N head outputs and maps them to one length-D vector.
inline Tensor multi_head_fuse(DiffGraph& g, const std::vector<Tensor>& head_outputs,
                              const FuseParams& fuse) {
    if (head_outputs.empty()) throw ShapeError("multi_head_fuse: needs at least one head");
    const int d = head_outputs.front().dim(0);
    for (const Tensor& h : head_outputs)
        if (h.rank() != 1 || h.dim(0) != d)
            throw ShapeError("multi_head_fuse: head output shape mismatch");
    if (fuse.f.dim(0) != d || fuse.f.dim(1) != d * static_cast<int>(head_outputs.size()))
        throw ShapeError("multi_head_fuse: fuse matrix is " + detail::shape_str(fuse.f.shape()) +
                         ", expected [" + std::to_string(d) + "x" +
                         std::to_string(d * head_outputs.size()) + "]");
    return affine(g, concat(g, head_outputs), fuse.f, fuse.g);
}

namespace detail {

// Broadcast channel weighting with optional residual. The forward value is
// literally f*gate + f so a zero gate with residual reproduces f bit-exactly.
inline Tensor channel_weight(DiffGraph& g, const Tensor& f, const Tensor& gate, bool residual) {
    if (f.rank() != 3 || gate.rank() != 1 || gate.dim(0) != f.dim(0))
        throw ShapeError("channel weighting: feature map " + detail::shape_str(f.shape()) +
                         " incompatible with gate " + detail::shape_str(gate.shape()));
    const int d = f.dim(0);
    const std::size_t plane = static_cast<std::size_t>(f.dim(1)) * f.dim(2);
    Tensor out = Tensor::zeros(f.shape(), f.requires_grad() || gate.requires_grad());
    auto run = [f, gate, out, d, plane, residual] {
        for (int ch = 0; ch < d; ++ch) {
            const double gc = gate[static_cast<std::size_t>(ch)];
            const double* fv = f.values().data() + static_cast<std::size_t>(ch) * plane;
            double* ov = out.values().data() + static_cast<std::size_t>(ch) * plane;
            if (residual)
                for (std::size_t i = 0; i < plane; ++i) ov[i] = fv[i] * gc + fv[i];
            else
                for (std::size_t i = 0; i < plane; ++i) ov[i] = fv[i] * gc;
        }
    };
    run();
    g.record(
        "channel_weight", {f, gate}, out, run,
        [f, gate, out, d, plane, residual] {
            for (int ch = 0; ch < d; ++ch) {
                const double gc = gate[static_cast<std::size_t>(ch)];
                const double* go = out.grad().data() + static_cast<std::size_t>(ch) * plane;
                const double* fv = f.values().data() + static_cast<std::size_t>(ch) * plane;
                if (f.requires_grad()) {
                    double* gf = f.grad().data() + static_cast<std::size_t>(ch) * plane;
                    const double factor = residual ? gc + 1.0 : gc;
                    for (std::size_t i = 0; i < plane; ++i) gf[i] += go[i] * factor;
                }
                if (gate.requires_grad()) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < plane; ++i) acc += go[i] * fv[i];
                    gate.grad()[static_cast<std::size_t>(ch)] += acc;
                }
            }
        });
    return out;
}

}  // namespace detail

/// Gates the fused logits (sigmoid or identity) and weights each channel of
/// f by broadcast, adding f back when residual mode is on.
inline Tensor apply_weighting(DiffGraph& g, const Tensor& f, const Tensor& w_logits,
                              const SignaConfig& config) {
    if (w_logits.rank() != 1 || w_logits.dim(0) != f.dim(0))
        throw ShapeError("apply_weighting: logits length " + detail::shape_str(w_logits.shape()) +
                         " does not match channels of " + detail::shape_str(f.shape()));
    Tensor gate = config.gate_mode == GateMode::Sigmoid ? sigmoid(g, w_logits) : w_logits;
    return detail::channel_weight(g, f, gate, config.residual);
}

/// The full attention block with its learnables.
class SignaBlock {
public:
    SignaBlock() = default;

    SignaBlock(const SignaConfig& config, Rng& rng) : config_(config) {
        config.validate();
        for (int h = 0; h < config.heads; ++h)
            heads_.push_back(SignaHeadParams::init(rng, config.label_count, config.channel_dim));
        fuse_ = FuseParams::init(rng, config.heads, config.channel_dim);
    }

    /// squeeze -> N× attention_head -> fuse -> gated residual weighting.
    Tensor apply(DiffGraph& g, const Tensor& f, const Tensor& l_s) const {
        if (f.rank() != 3 || f.dim(0) != config_.channel_dim)
            throw ShapeError("signa block: expected feature map with " +
                             std::to_string(config_.channel_dim) + " channels, got " +
                             detail::shape_str(f.shape()));
        Tensor z = squeeze_channels(g, f);
        std::vector<Tensor> head_outputs;
        head_outputs.reserve(heads_.size());
        for (const SignaHeadParams& head : heads_)
            head_outputs.push_back(attention_head(g, z, l_s, head));
        Tensor w_logits = multi_head_fuse(g, head_outputs, fuse_);
        return apply_weighting(g, f, w_logits, config_);
    }

    const SignaConfig& config() const { return config_; }
    std::vector<SignaHeadParams>& heads() { return heads_; }
    const std::vector<SignaHeadParams>& heads() const { return heads_; }
    FuseParams& fuse() { return fuse_; }
    const FuseParams& fuse() const { return fuse_; }

    std::vector<std::pair<std::string, Tensor>> named_params() const {
        std::vector<std::pair<std::string, Tensor>> out;
        for (std::size_t h = 0; h < heads_.size(); ++h) {
            const std::string prefix = "signa.head" + std::to_string(h) + ".";
            out.emplace_back(prefix + "a", heads_[h].a);
            out.emplace_back(prefix + "b", heads_[h].b);
            out.emplace_back(prefix + "v", heads_[h].v);
            out.emplace_back(prefix + "c", heads_[h].c);
        }
        out.emplace_back("signa.fuse.f", fuse_.f);
        out.emplace_back("signa.fuse.g", fuse_.g);
        return out;
    }

private:
    SignaConfig config_;
    std::vector<SignaHeadParams> heads_;
    FuseParams fuse_;
};

/// One-shot composition over explicit parameters.
inline Tensor signa_block(DiffGraph& g, const Tensor& f, const Tensor& l_s,
                          const std::vector<SignaHeadParams>& heads, const FuseParams& fuse,
                          const SignaConfig& config) {
    Tensor z = squeeze_channels(g, f);
    std::vector<Tensor> head_outputs;
    head_outputs.reserve(heads.size());
    for (const SignaHeadParams& head : heads)
        head_outputs.push_back(attention_head(g, z, l_s, head));
    return apply_weighting(g, f, multi_head_fuse(g, head_outputs, fuse), config);
}

}  // namespace signa
