#pragma once

#include <json.hpp>

#include "signa/attention.hpp"
#include "signa/model.hpp"
#include "signa/train.hpp"

namespace signa {

inline nlohmann::json to_json(const BackboneConfig& b) {
    return {{"stage_channels", b.stage_channels}, {"in_channels", b.in_channels},
            {"height", b.height},                 {"width", b.width},
            {"num_classes", b.num_classes},       {"slope", b.slope}};
}

inline BackboneConfig backbone_from_json(const nlohmann::json& j) {
    BackboneConfig b;
    j.at("stage_channels").get_to(b.stage_channels);
    j.at("in_channels").get_to(b.in_channels);
    j.at("height").get_to(b.height);
    j.at("width").get_to(b.width);
    j.at("num_classes").get_to(b.num_classes);
    j.at("slope").get_to(b.slope);
    return b;
}

inline nlohmann::json to_json(const SignaConfig& s) {
    return {{"heads", s.heads},
            {"insertion_layer", s.insertion_layer},
            {"gnn", to_string(s.gnn)},
            {"q", s.q},
            {"channel_dim", s.channel_dim},
            {"label_count", s.label_count},
            {"gate_mode", to_string(s.gate_mode)},
            {"residual", s.residual}};
}

inline SignaConfig signa_from_json(const nlohmann::json& j) {
    SignaConfig s;
    j.at("heads").get_to(s.heads);
    j.at("insertion_layer").get_to(s.insertion_layer);
    s.gnn = parse_gnn_kind(j.at("gnn").get<std::string>());
    j.at("q").get_to(s.q);
    j.at("channel_dim").get_to(s.channel_dim);
    j.at("label_count").get_to(s.label_count);
    s.gate_mode = parse_gate_mode(j.at("gate_mode").get<std::string>());
    j.at("residual").get_to(s.residual);
    return s;
}

inline nlohmann::json to_json(const TrainConfig& t) {
    return {{"lr", t.lr},
            {"lr_decay", t.lr_decay},
            {"lr_decay_every", t.lr_decay_every},
            {"batch_size", t.batch_size},
            {"epochs", t.epochs},
            {"beta1", t.beta1},
            {"beta2", t.beta2},
            {"adam_eps", t.adam_eps},
            {"seed", t.seed},
            {"bce_epsilon", t.bce_epsilon},
            {"hflip_prob", t.hflip_prob},
            {"vflip_prob", t.vflip_prob},
            {"augment", t.augment}};
}

inline TrainConfig train_from_json(const nlohmann::json& j) {
    TrainConfig t;
    j.at("lr").get_to(t.lr);
    j.at("lr_decay").get_to(t.lr_decay);
    j.at("lr_decay_every").get_to(t.lr_decay_every);
    j.at("batch_size").get_to(t.batch_size);
    j.at("epochs").get_to(t.epochs);
    j.at("beta1").get_to(t.beta1);
    j.at("beta2").get_to(t.beta2);
    j.at("adam_eps").get_to(t.adam_eps);
    j.at("seed").get_to(t.seed);
    j.at("bce_epsilon").get_to(t.bce_epsilon);
    j.at("hflip_prob").get_to(t.hflip_prob);
    j.at("vflip_prob").get_to(t.vflip_prob);
    j.at("augment").get_to(t.augment);
    return t;
}

}  // namespace signa
