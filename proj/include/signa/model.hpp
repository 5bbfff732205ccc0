#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "signa/attention.hpp"
#include "signa/dataset.hpp"
#include "signa/gnn.hpp"
#include "signa/ops.hpp"

namespace signa {

/// Four stride-2 conv stages followed by global pooling and a linear
/// classifier; the desk-scale stand-in for a staged CNN backbone.
struct BackboneConfig {
    std::array<int, 4> stage_channels{16, 32, 64, 128};
    int in_channels = 3;
    int height = 32;
    int width = 32;
    int num_classes = 0;
    double slope = 0.01;

    void validate() const {
        for (int c : stage_channels)
            if (c < 1) throw ConfigError("backbone: stage channels must be positive");
        if (in_channels < 1 || height < 1 || width < 1)
            throw ConfigError("backbone: invalid input shape");
        if (num_classes < 1) throw ConfigError("backbone: class count must be >= 1");
    }
};

/// The assembled network: backbone stages, optional SIGNA insertion, the
/// semantic encoder feeding it, and the classifier head.
class Model {
public:
    Model() = default;

    const BackboneConfig& backbone() const { return backbone_; }
    const std::optional<SignaConfig>& signa_config() const { return signa_cfg_; }
    bool has_signa() const { return signa_cfg_.has_value(); }
    SignaBlock& block() { return block_; }
    const SignaBlock& block() const { return block_; }
    const SemanticEncoder& encoder() const { return encoder_; }
    const std::vector<std::string>& vocabulary() const { return vocabulary_; }

    /// Trainable tensors in a stable order with stable path names.
    std::vector<std::pair<std::string, Tensor>> named_parameters() const {
        std::vector<std::pair<std::string, Tensor>> out;
        for (std::size_t i = 0; i < stage_kernels_.size(); ++i)
            out.emplace_back("backbone.stage" + std::to_string(i + 1) + ".kernel",
                             stage_kernels_[i]);
        out.emplace_back("classifier.w", cls_w_);
        out.emplace_back("classifier.b", cls_b_);
        if (signa_cfg_) {
            for (const auto& p : encoder_.named_params()) out.push_back(p);
            for (const auto& p : block_.named_params()) out.push_back(p);
        }
        return out;
    }

    std::vector<Tensor> parameters() const {
        std::vector<Tensor> out;
        for (auto& [name, t] : named_parameters()) out.push_back(t);
        return out;
    }

    /// Non-trainable tensors a checkpoint must carry to rebuild the model.
    std::vector<std::pair<std::string, Tensor>> named_buffers() const {
        std::vector<std::pair<std::string, Tensor>> out;
        if (signa_cfg_) {
            out.emplace_back("semantics.embedding", embedding_);
            out.emplace_back("graph.adjacency", adjacency_);
            out.emplace_back("graph.normalized", normalized_);
        }
        return out;
    }

    /// Records the forward pass of one batch; logits are B×C, pre-sigmoid.
    Tensor forward(DiffGraph& g, const std::vector<Tensor>& images) const {
        if (images.empty()) throw ShapeError("forward: empty batch");
        Tensor l_s;
        if (signa_cfg_) l_s = encoder_.encode(g);
        std::vector<Tensor> rows;
        rows.reserve(images.size());
        for (const Tensor& img : images) rows.push_back(forward_sample(g, img, l_s));
        return stack_rows(g, rows);
    }

    Tensor forward_sample(DiffGraph& g, const Tensor& img, const Tensor& l_s) const {
        if (img.rank() != 3 || img.dim(0) != backbone_.in_channels)
            throw ShapeError("forward: image shape " + detail::shape_str(img.shape()) +
                             " does not match configured input channels");
        Tensor h = img;
        for (int stage = 0; stage < 4; ++stage) {
            h = leaky_relu(g, conv2d(g, h, stage_kernels_[static_cast<std::size_t>(stage)], 2, 1),
                           backbone_.slope);
            if (signa_cfg_ && signa_cfg_->insertion_layer == stage + 1)
                h = block_.apply(g, h, l_s);
        }
        return affine(g, global_avg_pool(g, h), cls_w_, cls_b_);
    }

private:
    friend Model build_model(const BackboneConfig&, const std::optional<SignaConfig>&,
                             const LabelGraph*, const EmbeddingMatrix*, std::uint64_t);
    friend struct ModelIo;

    BackboneConfig backbone_;
    std::optional<SignaConfig> signa_cfg_;
    std::vector<Tensor> stage_kernels_;
    Tensor cls_w_, cls_b_;
    SemanticEncoder encoder_;
    SignaBlock block_;
    Tensor embedding_, adjacency_, normalized_;  // checkpoint buffers
    std::vector<std::string> vocabulary_;
};

/// Builds a baseline (signa = nullopt) or SIGNA model. With SIGNA present,
/// the block's channel width must equal the insertion stage's channels and
/// the semantic encoder is built with that width.
inline Model build_model(const BackboneConfig& backbone,
                         const std::optional<SignaConfig>& signa, const LabelGraph* graph,
                         const EmbeddingMatrix* embeddings, std::uint64_t seed) {
    backbone.validate();
    Model m;
    m.backbone_ = backbone;

    Rng init_rng(mix_seed(seed, 0x1417));
    int in_ch = backbone.in_channels;
    for (int stage = 0; stage < 4; ++stage) {
        const int out_ch = backbone.stage_channels[static_cast<std::size_t>(stage)];
        m.stage_kernels_.push_back(
            init_uniform(init_rng, {out_ch, in_ch, 3, 3}, in_ch * 9));
        in_ch = out_ch;
    }
    m.cls_w_ = init_uniform(init_rng, {backbone.num_classes, in_ch}, in_ch);
    m.cls_b_ = init_uniform(init_rng, {backbone.num_classes}, in_ch);

    if (signa) {
        if (graph == nullptr || embeddings == nullptr)
            throw ConfigError("build_model: SIGNA needs a label graph and embeddings");
        SignaConfig cfg = *signa;
        const int stage_dim =
            backbone.stage_channels[static_cast<std::size_t>(cfg.insertion_layer - 1)];
        if (cfg.channel_dim == 0) cfg.channel_dim = stage_dim;
        if (cfg.channel_dim != stage_dim)
            throw ConfigError("build_model: SIGNA channel dim " +
                              std::to_string(cfg.channel_dim) + " does not match stage " +
                              std::to_string(cfg.insertion_layer) + " channels " +
                              std::to_string(stage_dim));
        cfg.label_count = graph->label_count();
        if (backbone.num_classes != graph->label_count())
            throw ConfigError("build_model: classifier classes != graph label count");
        cfg.validate();
        m.signa_cfg_ = cfg;
        m.encoder_ = SemanticEncoder(*embeddings, *graph, cfg.gnn, cfg.channel_dim, init_rng,
                                     backbone.slope);
        m.block_ = SignaBlock(cfg, init_rng);
        m.embedding_ = mat_to_tensor(embeddings->matrix);
        m.adjacency_ = mat_to_tensor(graph->adjacency);
        m.normalized_ = mat_to_tensor(graph->normalized);
        m.vocabulary_ = graph->labels;
    }
    return m;
}

/// Thresholded sigmoid predictions, one binary row per image.
inline std::vector<std::uint8_t> predict(const Model& model, const std::vector<Tensor>& images,
                                         double threshold = 0.5) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ConfigError("predict: threshold must lie strictly inside (0,1)");
    DiffGraph g;
    Tensor logits = model.forward(g, images);
    std::vector<std::uint8_t> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i)
        out[i] = detail::sigmoid_stable(logits[i]) >= threshold ? 1 : 0;
    return out;
}

}  // namespace signa
