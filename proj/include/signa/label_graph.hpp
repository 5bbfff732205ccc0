#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "signa/matrix.hpp"

namespace signa {

using LabelSet = std::set<int>;

/// Per-image label pair statistics: N_ii counts images containing label i,
/// N_ij counts images containing both i and j.
inline Mat count_cooccurrence(const std::vector<LabelSet>& label_sets, int label_count) {
    if (label_count < 1) throw ConfigError("count_cooccurrence: label count must be >= 1");
    if (label_sets.empty())
        throw ConfigError("count_cooccurrence: empty corpus, no statistics possible");
    Mat n(label_count, label_count);
    for (const LabelSet& labels : label_sets) {
        for (int i : labels) {
            if (i < 0 || i >= label_count)
                throw ConfigError("count_cooccurrence: label index " + std::to_string(i) +
                                  " out of range for C=" + std::to_string(label_count));
            for (int j : labels) n.at(i, j) += 1.0;
        }
    }
    return n;
}

/// P_ij = N_ij / N_ii. Rows with N_ii = 0 (label absent from the corpus)
/// stay all-zero so downstream stages keep working on degenerate splits.
inline Mat cooccurrence_probability(const Mat& n) {
    if (n.rows != n.cols) throw ShapeError("cooccurrence_probability: counts must be square");
    Mat p(n.rows, n.cols);
    for (int i = 0; i < n.rows; ++i) {
        const double nii = n.at(i, i);
        if (nii <= 0.0) continue;
        for (int j = 0; j < n.cols; ++j) p.at(i, j) = n.at(i, j) / nii;
    }
    return p;
}

/// Zeroes entries below the threshold Q, keeping the rest as-is.
inline Mat threshold_graph(const Mat& p, double q) {
    if (!(q >= 0.0 && q <= 1.0))
        throw ConfigError("threshold_graph: Q must lie in [0,1], got " + std::to_string(q));
    Mat g(p.rows, p.cols);
    for (std::size_t i = 0; i < p.data.size(); ++i)
        g.data[i] = p.data[i] < q ? 0.0 : p.data[i];
    return g;
}

/// Symmetric normalization of G + I: D̃^{-1/2} (G + I) D̃^{-1/2}.
inline Mat normalize_adjacency(const Mat& g) {
    if (g.rows != g.cols) throw ShapeError("normalize_adjacency: adjacency must be square");
    for (double v : g.data)
        if (v < 0.0) throw NumericError("normalize_adjacency: adjacency has a negative entry");
    const int n = g.rows;
    Mat tilde = g;
    for (int i = 0; i < n; ++i) tilde.at(i, i) += 1.0;
    std::vector<double> dinv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double deg = 0.0;
        for (int j = 0; j < n; ++j) deg += tilde.at(i, j);
        dinv[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(deg);  // deg >= 1 via self loop
    }
    Mat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            // scale factor first so symmetric inputs stay bit-exactly symmetric
            out.at(i, j) = (dinv[static_cast<std::size_t>(i)] * dinv[static_cast<std::size_t>(j)]) *
                           tilde.at(i, j);
    return out;
}

/// The full chain N -> P -> G -> Ĝ plus the vocabulary.
struct LabelGraph {
    std::vector<std::string> labels;
    Mat counts;      // N
    Mat prob;        // P
    Mat adjacency;   // G
    Mat normalized;  // Ĝ
    double q = 0.4;

    int label_count() const { return counts.rows; }

    /// #{(i,j) : i != j, G_ij > 0}
    int directed_edge_count() const {
        int edges = 0;
        for (int i = 0; i < adjacency.rows; ++i)
            for (int j = 0; j < adjacency.cols; ++j)
                if (i != j && adjacency.at(i, j) > 0.0) ++edges;
        return edges;
    }
};

inline LabelGraph build_label_graph(const std::vector<LabelSet>& label_sets,
                                    std::vector<std::string> labels, double q = 0.4) {
    LabelGraph graph;
    graph.q = q;
    graph.counts = count_cooccurrence(label_sets, static_cast<int>(labels.size()));
    graph.labels = std::move(labels);
    graph.prob = cooccurrence_probability(graph.counts);
    graph.adjacency = threshold_graph(graph.prob, q);
    graph.normalized = normalize_adjacency(graph.adjacency);
    return graph;
}

}  // namespace signa
