#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "signa/dataset.hpp"
#include "signa/loss.hpp"
#include "signa/metrics.hpp"
#include "signa/model.hpp"
#include "signa/optim.hpp"
#include "signa/rng.hpp"

namespace signa {

struct TrainConfig {
    double lr = 0.001;
    double lr_decay = 0.1;
    int lr_decay_every = 25;
    int batch_size = 16;
    int epochs = 80;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    double bce_epsilon = 1e-7;
    double hflip_prob = 0.5;
    double vflip_prob = 0.5;
    bool augment = true;

    void validate() const {
        if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
        if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
        if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
        if (lr_decay_every < 1) throw ConfigError("train: decay interval must be >= 1");
        if (!(bce_epsilon > 0.0 && bce_epsilon < 0.5))
            throw ConfigError("train: bce epsilon must be in (0, 0.5)");
    }
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_f1 = 0.0;
};

/// Snapshot of every trainable tensor, used for best-epoch retention.
struct ParamSnapshot {
    std::vector<std::pair<std::string, std::vector<double>>> values;

    static ParamSnapshot take(const Model& model) {
        ParamSnapshot s;
        for (const auto& [name, t] : model.named_parameters())
            s.values.emplace_back(name, t.values());
        return s;
    }

    void restore(Model& model) const {
        auto params = model.named_parameters();
        if (params.size() != values.size())
            throw ConfigError("snapshot does not match model parameter list");
        for (std::size_t i = 0; i < params.size(); ++i) params[i].second.values() = values[i].second;
    }
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_val_f1 = -1.0;
    ParamSnapshot best_params;
    std::string best_rng_state;  // shuffle and augment engine states at the snapshot
};

namespace detail {

inline void flip_horizontal(std::vector<double>& img, int channels, int h, int w) {
    for (int c = 0; c < channels; ++c)
        for (int y = 0; y < h; ++y) {
            double* row = img.data() + (static_cast<std::size_t>(c) * h + y) * w;
            for (int x = 0; x < w / 2; ++x) std::swap(row[x], row[w - 1 - x]);
        }
}

inline void flip_vertical(std::vector<double>& img, int channels, int h, int w) {
    for (int c = 0; c < channels; ++c)
        for (int y = 0; y < h / 2; ++y) {
            double* a = img.data() + (static_cast<std::size_t>(c) * h + y) * w;
            double* b = img.data() + (static_cast<std::size_t>(c) * h + (h - 1 - y)) * w;
            for (int x = 0; x < w; ++x) std::swap(a[x], b[x]);
        }
}

}  // namespace detail

/// Validation-set example-based F1 at threshold 0.5, batched to bound the
/// recorded graph size.
inline double validation_f1(const Model& model, const MultiLabelDataset& data,
                            const std::vector<int>& indices, int batch_size = 64) {
    const int c = data.label_count();
    std::vector<std::uint8_t> pred, target;
    pred.reserve(indices.size() * static_cast<std::size_t>(c));
    target.reserve(indices.size() * static_cast<std::size_t>(c));
    for (std::size_t start = 0; start < indices.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t stop = std::min(indices.size(), start + static_cast<std::size_t>(batch_size));
        std::vector<Tensor> images;
        images.reserve(stop - start);
        for (std::size_t i = start; i < stop; ++i) {
            images.push_back(data.image_tensor(indices[i]));
            const std::uint8_t* row = data.label_row(indices[i]);
            target.insert(target.end(), row, row + c);
        }
        std::vector<std::uint8_t> batch_pred = predict(model, images, 0.5);
        pred.insert(pred.end(), batch_pred.begin(), batch_pred.end());
    }
    return example_based_scores(pred, target, static_cast<int>(indices.size()), c, 1).fbeta;
}

/// Standard loop: seeded shuffle, flip augmentation, BCE, reverse pass,
/// Adam update, step decay. History carries per-epoch train loss and
/// validation example-based F1; the best-validation snapshot is retained.
inline TrainResult train(Model& model, const MultiLabelDataset& data, const TrainConfig& tc) {
    tc.validate();
    std::vector<int> train_idx = data.split_indices(kTrain);
    std::vector<int> val_idx = data.split_indices(kVal);
    if (train_idx.empty()) throw ConfigError("train: empty training split");
    if (val_idx.empty()) throw ConfigError("train: empty validation split");

    Rng shuffle_rng(mix_seed(tc.seed, 0x5f1e));
    Rng augment_rng(mix_seed(tc.seed, 0xa06e));

    std::vector<Tensor> params = model.parameters();
    Adam adam(params, tc.beta1, tc.beta2, tc.adam_eps);
    const int c = data.label_count();

    TrainResult result;
    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        const double lr = lr_at_epoch(tc.lr, epoch, tc.lr_decay_every, tc.lr_decay);
        shuffle(shuffle_rng, train_idx);

        double loss_sum = 0.0;
        long loss_batches = 0;
        for (std::size_t start = 0; start < train_idx.size();
             start += static_cast<std::size_t>(tc.batch_size)) {
            const std::size_t stop =
                std::min(train_idx.size(), start + static_cast<std::size_t>(tc.batch_size));
            std::vector<Tensor> images;
            std::vector<double> target_values;
            images.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                const int idx = train_idx[i];
                Tensor img = data.image_tensor(idx);
                if (tc.augment) {
                    if (bernoulli(augment_rng, tc.hflip_prob))
                        detail::flip_horizontal(img.values(), data.channels, data.height,
                                                data.width);
                    if (bernoulli(augment_rng, tc.vflip_prob))
                        detail::flip_vertical(img.values(), data.channels, data.height,
                                              data.width);
                }
                images.push_back(std::move(img));
                const std::uint8_t* row = data.label_row(idx);
                for (int l = 0; l < c; ++l) target_values.push_back(row[l]);
            }
            Tensor targets({static_cast<int>(stop - start), c}, std::move(target_values));

            DiffGraph g;
            Tensor logits = model.forward(g, images);
            Tensor loss = bce_loss(g, logits, targets, tc.bce_epsilon);
            if (!std::isfinite(loss[0]))
                throw NumericError("train: non-finite loss " + std::to_string(loss[0]) +
                                   " at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(loss_batches));
            adam.zero_grad();
            reverse_pass(g, Tensor::scalar(1.0));
            adam.step(lr);
            loss_sum += loss[0];
            ++loss_batches;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = lr;
        stats.train_loss = loss_sum / static_cast<double>(loss_batches);
        stats.val_f1 = validation_f1(model, data, val_idx);
        result.history.push_back(stats);

        if (stats.val_f1 > result.best_val_f1) {
            result.best_val_f1 = stats.val_f1;
            result.best_epoch = epoch;
            result.best_params = ParamSnapshot::take(model);
            std::ostringstream rs;
            rs << shuffle_rng << ';' << augment_rng;
            result.best_rng_state = rs.str();
        }
    }
    return result;
}

}  // namespace signa
