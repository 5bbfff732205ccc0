#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "signa/config_json.hpp"
#include "signa/model.hpp"

namespace signa {

constexpr const char* kCheckpointMagic = "SIGNA1";

/// A loaded checkpoint: the config echo, training position, RNG state and
/// every tensor keyed by its stable path.
struct Checkpoint {
    nlohmann::json config;
    int epoch = 0;
    std::string rng_state;
    std::vector<std::pair<std::string, Tensor>> tensors;

    const Tensor& tensor(const std::string& name) const {
        for (const auto& [n, t] : tensors)
            if (n == name) return t;
        throw FormatError("checkpoint is missing tensor '" + name + "'");
    }
};

namespace detail {

inline void write_le_f64(std::ostream& out, const std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double d : v) {
            auto u = std::bit_cast<std::uint64_t>(d);
            char b[8];
            for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(u >> (8 * i));
            out.write(b, 8);
        }
    }
}

inline void read_le_f64(std::istream& in, std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double& d : v) {
            unsigned char b[8];
            in.read(reinterpret_cast<char*>(b), 8);
            std::uint64_t u = 0;
            for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
            d = std::bit_cast<double>(u);
        }
    }
}

}  // namespace detail

/// Saves the model's parameters and buffers. Layout: magic line, one-line
/// JSON header with the tensor index (shapes and byte offsets into the
/// payload), then raw little-endian float64 payload.
inline void save_checkpoint(const std::string& path, const Model& model, int epoch,
                            const std::string& rng_state,
                            const nlohmann::json& extra_config = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);

    nlohmann::json config;
    config["backbone"] = to_json(model.backbone());
    if (model.has_signa()) config["signa"] = to_json(*model.signa_config());
    config["vocabulary"] = model.vocabulary();
    if (!extra_config.is_null())
        for (const auto& [k, v] : extra_config.items()) config[k] = v;

    std::vector<std::pair<std::string, Tensor>> tensors = model.named_parameters();
    for (const auto& buf : model.named_buffers()) tensors.push_back(buf);

    nlohmann::json index = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : tensors) {
        index.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
        offset += t.size() * sizeof(double);
    }

    nlohmann::json header;
    header["version"] = 1;
    header["epoch"] = epoch;
    header["rng"] = rng_state;
    header["config"] = config;
    header["tensors"] = index;

    out << kCheckpointMagic << "\n" << header.dump() << "\n";
    for (const auto& [name, t] : tensors) detail::write_le_f64(out, t.values());
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != kCheckpointMagic)
        throw FormatError("checkpoint " + path + ": bad magic '" + magic + "'");
    std::string header_line;
    std::getline(in, header_line);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("checkpoint " + path + ": bad header: " + e.what());
    }

    Checkpoint ckpt;
    ckpt.config = header.at("config");
    ckpt.epoch = header.at("epoch").get<int>();
    ckpt.rng_state = header.at("rng").get<std::string>();

    const std::istream::pos_type payload_start = in.tellg();
    for (const nlohmann::json& entry : header.at("tensors")) {
        const std::string name = entry.at("name").get<std::string>();
        const std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
        const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
        std::vector<double> values(detail::shape_numel(shape));
        in.seekg(payload_start + static_cast<std::istream::off_type>(offset));
        detail::read_le_f64(in, values);
        if (!in) throw FormatError("checkpoint " + path + ": truncated payload at '" + name + "'");
        ckpt.tensors.emplace_back(name, Tensor(shape, std::move(values)));
    }
    return ckpt;
}

/// Model reconstruction from a checkpoint's config echo and tensors.
struct ModelIo {
    static Model rebuild(const Checkpoint& ckpt) {
        BackboneConfig backbone = backbone_from_json(ckpt.config.at("backbone"));
        std::optional<SignaConfig> signa;
        LabelGraph graph;
        EmbeddingMatrix emb;
        if (ckpt.config.contains("signa")) {
            signa = signa_from_json(ckpt.config.at("signa"));
            const Tensor& adjacency = ckpt.tensor("graph.adjacency");
            const Tensor& normalized = ckpt.tensor("graph.normalized");
            const Tensor& embedding = ckpt.tensor("semantics.embedding");
            const int c = adjacency.dim(0);
            graph.labels = ckpt.config.at("vocabulary").get<std::vector<std::string>>();
            graph.q = signa->q;
            graph.counts = Mat(c, c);
            graph.prob = Mat(c, c, adjacency.values());
            graph.adjacency = Mat(c, c, adjacency.values());
            graph.normalized = Mat(c, c, normalized.values());
            emb.matrix = Mat(embedding.dim(0), embedding.dim(1), embedding.values());
            emb.source = "checkpoint";
        }
        Model model = build_model(backbone, signa, signa ? &graph : nullptr,
                                  signa ? &emb : nullptr, /*seed=*/0);
        auto params = model.named_parameters();
        for (auto& [name, t] : params) {
            const Tensor& stored = ckpt.tensor(name);
            if (stored.shape() != t.shape())
                throw FormatError("checkpoint tensor '" + name + "' has shape " +
                                  detail::shape_str(stored.shape()) + ", model expects " +
                                  detail::shape_str(t.shape()));
            t.values() = stored.values();
        }
        return model;
    }
};

inline Model model_from_checkpoint(const Checkpoint& ckpt) { return ModelIo::rebuild(ckpt); }

}  // namespace signa
