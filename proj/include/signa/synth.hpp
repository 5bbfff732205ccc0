#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "signa/dataset.hpp"
#include "signa/matrix.hpp"
#include "signa/rng.hpp"

namespace signa {

/// One scene template: labels that always appear plus independently
/// sampled co-labels.
struct SceneSpec {
    std::string name;
    std::vector<int> base;
    std::map<int, double> co;  // label index -> inclusion probability
    int count = 0;
};

/// Generator spec for the planted-co-occurrence benchmark. The ambiguous
/// pair renders with one shared visual signature, so those two labels can
/// only be told apart through the labels they co-occur with.
struct SynthSpec {
    int label_count = 8;
    std::vector<std::string> labels;
    int channels = 3;
    int height = 32;
    int width = 32;
    double sigma = 0.25;
    std::array<int, 2> ambiguous{6, 7};
    std::uint64_t seed = 7;
    std::vector<SceneSpec> scenes;

    void validate() const {
        if (label_count < 1) throw ConfigError("synth: label count must be >= 1");
        if (static_cast<int>(labels.size()) != label_count)
            throw ConfigError("synth: need one name per label");
        if (channels < 1 || height < 8 || width < 8)
            throw ConfigError("synth: image must be at least 8x8");
        if (!(sigma >= 0.0)) throw ConfigError("synth: sigma must be nonnegative");
        if (scenes.empty()) throw ConfigError("synth: need at least one scene");
        std::vector<bool> seen(static_cast<std::size_t>(label_count), false);
        for (const SceneSpec& s : scenes) {
            if (s.count < 1) throw ConfigError("synth: scene counts must be >= 1");
            for (int l : s.base) {
                if (l < 0 || l >= label_count)
                    throw ConfigError("synth: base label " + std::to_string(l) + " out of range");
                seen[static_cast<std::size_t>(l)] = true;
            }
            for (const auto& [l, p] : s.co) {
                if (l < 0 || l >= label_count)
                    throw ConfigError("synth: co-label " + std::to_string(l) + " out of range");
                if (!(p >= 0.0 && p <= 1.0))
                    throw ConfigError("synth: co-label probability must lie in [0,1]");
                if (p > 0.0) seen[static_cast<std::size_t>(l)] = true;
            }
        }
        for (int l = 0; l < label_count; ++l)
            if (!seen[static_cast<std::size_t>(l)])
                throw ConfigError("synth: label '" + labels[static_cast<std::size_t>(l)] +
                                  "' appears in no scene");
        for (int a : ambiguous)
            if (a < 0 || a >= label_count)
                throw ConfigError("synth: ambiguous pair index out of range");
    }

    int total_count() const {
        int n = 0;
        for (const SceneSpec& s : scenes) n += s.count;
        return n;
    }

    double presence_prob(const SceneSpec& s, int label) const {
        for (int b : s.base)
            if (b == label) return 1.0;
        auto it = s.co.find(label);
        return it == s.co.end() ? 0.0 : it->second;
    }

    /// Expected pair counts under the generative process (labels are
    /// independent given the scene).
    Mat analytic_counts() const {
        Mat n(label_count, label_count);
        for (const SceneSpec& s : scenes)
            for (int i = 0; i < label_count; ++i) {
                const double pi = presence_prob(s, i);
                if (pi == 0.0) continue;
                for (int j = 0; j < label_count; ++j) {
                    const double pj = presence_prob(s, j);
                    n.at(i, j) += s.count * (i == j ? pi : pi * pj);
                }
            }
        return n;
    }

    /// Analytic counterpart of the measured co-occurrence probabilities.
    Mat analytic_p() const {
        Mat n = analytic_counts();
        Mat p(label_count, label_count);
        for (int i = 0; i < label_count; ++i) {
            if (n.at(i, i) <= 0.0) continue;
            for (int j = 0; j < label_count; ++j) p.at(i, j) = n.at(i, j) / n.at(i, i);
        }
        return p;
    }

    /// The reference benchmark: 2000 samples over three scene templates
    /// with one ambiguous pair (court/tank) resolvable only from context.
    static SynthSpec default_spec() {
        SynthSpec s;
        s.labels = {"pavement", "buildings", "cars", "grass", "trees", "water", "court", "tank"};
        s.scenes = {
            {"urban", {0, 1}, {{2, 0.7}, {3, 0.25}, {6, 0.75}}, 800},
            {"park", {3, 4}, {{5, 0.55}, {2, 0.2}, {7, 0.75}}, 800},
            {"harbor", {5, 0}, {{2, 0.45}, {1, 0.3}}, 400},
        };
        return s;
    }
};

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
    SynthSpec s = SynthSpec::default_spec();
    if (j.contains("C")) j.at("C").get_to(s.label_count);
    if (j.contains("labels")) j.at("labels").get_to(s.labels);
    if (j.contains("image_size")) {
        std::array<int, 3> dims{};
        j.at("image_size").get_to(dims);
        s.channels = dims[0];
        s.height = dims[1];
        s.width = dims[2];
    }
    if (j.contains("sigma")) j.at("sigma").get_to(s.sigma);
    if (j.contains("ambiguous")) j.at("ambiguous").get_to(s.ambiguous);
    if (j.contains("seed")) j.at("seed").get_to(s.seed);
    if (j.contains("scenes")) {
        s.scenes.clear();
        for (const nlohmann::json& js : j.at("scenes")) {
            SceneSpec scene;
            if (js.contains("name")) js.at("name").get_to(scene.name);
            js.at("base").get_to(scene.base);
            js.at("count").get_to(scene.count);
            if (js.contains("co"))
                for (const auto& [key, value] : js.at("co").items())
                    scene.co[std::stoi(key)] = value.get<double>();
            s.scenes.push_back(std::move(scene));
        }
    }
    if (s.labels.size() != static_cast<std::size_t>(s.label_count)) {
        s.labels.clear();
        for (int l = 0; l < s.label_count; ++l) s.labels.push_back("l" + std::to_string(l));
    }
    return s;
}

inline nlohmann::json to_json(const SynthSpec& s) {
    nlohmann::json scenes = nlohmann::json::array();
    for (const SceneSpec& scene : s.scenes) {
        nlohmann::json co;
        for (const auto& [l, p] : scene.co) co[std::to_string(l)] = p;
        scenes.push_back({{"name", scene.name},
                          {"base", scene.base},
                          {"co", co},
                          {"count", scene.count}});
    }
    return {{"C", s.label_count},
            {"labels", s.labels},
            {"image_size", {s.channels, s.height, s.width}},
            {"sigma", s.sigma},
            {"ambiguous", s.ambiguous},
            {"seed", s.seed},
            {"scenes", scenes}};
}

namespace detail {

// Visual signature of one label: palette color plus a texture pattern.
// The second member of the ambiguous pair borrows the first one's
// signature wholesale.
struct PatchStyle {
    double color[3];
    int pattern;  // 0 solid, 1 stripes, 2 checker, 3 diagonal
};

inline PatchStyle patch_style(int label, const std::array<int, 2>& ambiguous) {
    static constexpr double kPalette[][3] = {
        {0.85, 0.25, 0.25}, {0.25, 0.85, 0.25}, {0.25, 0.35, 0.9}, {0.9, 0.85, 0.2},
        {0.85, 0.3, 0.85},  {0.25, 0.85, 0.85}, {0.95, 0.6, 0.2},  {0.6, 0.6, 0.95},
        {0.9, 0.9, 0.9},    {0.5, 0.25, 0.1},   {0.4, 0.7, 0.3},   {0.7, 0.4, 0.6},
    };
    constexpr int kPaletteSize = 12;
    int effective = label == ambiguous[1] ? ambiguous[0] : label;
    PatchStyle s;
    const double* c = kPalette[effective % kPaletteSize];
    s.color[0] = c[0];
    s.color[1] = c[1];
    s.color[2] = c[2];
    s.pattern = effective % 4;
    return s;
}

inline void draw_patch(std::vector<float>& img, int channels, int h, int w, int cy, int cx,
                       int cell, const PatchStyle& style) {
    for (int y = 0; y < cell; ++y)
        for (int x = 0; x < cell; ++x) {
            double mask = 1.0;
            switch (style.pattern) {
                case 1: mask = (y / 2) % 2 == 0 ? 1.0 : 0.35; break;
                case 2: mask = ((y / 2) + (x / 2)) % 2 == 0 ? 1.0 : 0.3; break;
                case 3: mask = ((y + x) / 2) % 2 == 0 ? 1.0 : 0.4; break;
                default: break;
            }
            for (int c = 0; c < channels; ++c) {
                const double v = style.color[c % 3] * mask;
                img[(static_cast<std::size_t>(c) * h + cy + y) * w + cx + x] =
                    static_cast<float>(v);
            }
        }
}

}  // namespace detail

/// Deterministic generation from (spec, seed): per-label patches placed on
/// a grid over a gray background, Gaussian pixel noise, per-scene 70/10/20
/// split. Labels are the scene's base set plus sampled co-labels.
inline MultiLabelDataset synthesize_dataset(const SynthSpec& spec) {
    spec.validate();
    Rng rng(mix_seed(spec.seed, 0xdada));

    MultiLabelDataset data;
    data.channels = spec.channels;
    data.height = spec.height;
    data.width = spec.width;
    data.vocabulary = spec.labels;

    const int cell = 8;
    const int grid_y = spec.height / cell;
    const int grid_x = spec.width / cell;
    const int cells = grid_y * grid_x;
    const std::size_t elems = data.image_elems();

    std::vector<int> scene_start;  // first image index per scene
    for (std::size_t si = 0; si < spec.scenes.size(); ++si) {
        const SceneSpec& scene = spec.scenes[si];
        scene_start.push_back(data.count());
        for (int img_i = 0; img_i < scene.count; ++img_i) {
            LabelSet present(scene.base.begin(), scene.base.end());
            for (const auto& [l, p] : scene.co)
                if (bernoulli(rng, p)) present.insert(l);

            std::vector<float> img(elems, 0.12f);  // background
            std::vector<int> free_cells(static_cast<std::size_t>(cells));
            for (int ci = 0; ci < cells; ++ci) free_cells[static_cast<std::size_t>(ci)] = ci;
            for (int l : present) {
                std::uniform_int_distribution<std::size_t> pick(0, free_cells.size() - 1);
                const std::size_t slot = pick(rng);
                const int chosen = free_cells[slot];
                free_cells.erase(free_cells.begin() + static_cast<std::ptrdiff_t>(slot));
                detail::draw_patch(img, spec.channels, spec.height, spec.width,
                                   (chosen / grid_x) * cell, (chosen % grid_x) * cell, cell,
                                   detail::patch_style(l, spec.ambiguous));
                if (free_cells.empty()) break;
            }
            if (spec.sigma > 0.0)
                for (float& p : img)
                    p = static_cast<float>(p + normal(rng, 0.0, spec.sigma));

            data.pixels.insert(data.pixels.end(), img.begin(), img.end());
            for (int l = 0; l < spec.label_count; ++l)
                data.labels.push_back(present.count(l) ? 1 : 0);
            data.split.push_back(kTrain);  // reassigned below
            data.scene.push_back(static_cast<int>(si));
        }
    }

    // per-scene 70/10/20 split over a seeded shuffle of the scene's images
    for (std::size_t si = 0; si < spec.scenes.size(); ++si) {
        const int start = scene_start[si];
        const int count = spec.scenes[si].count;
        std::vector<int> order(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = start + i;
        shuffle(rng, order);
        const int n_train = static_cast<int>(0.7 * count);
        const int n_val = static_cast<int>(0.1 * count);
        for (int i = 0; i < count; ++i) {
            int which = i < n_train ? kTrain : (i < n_train + n_val ? kVal : kTest);
            data.split[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = which;
        }
    }

    // the planted statistics must cover every label
    std::vector<int> counts(static_cast<std::size_t>(spec.label_count), 0);
    for (int i = 0; i < data.count(); ++i)
        for (int l = 0; l < spec.label_count; ++l)
            counts[static_cast<std::size_t>(l)] += data.label_row(i)[l];
    for (int l = 0; l < spec.label_count; ++l)
        if (counts[static_cast<std::size_t>(l)] == 0)
            throw ConfigError("synth: label '" + spec.labels[static_cast<std::size_t>(l)] +
                              "' has zero instances in the generated corpus");
    return data;
}

}  // namespace signa
