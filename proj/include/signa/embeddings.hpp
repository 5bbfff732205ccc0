#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "signa/matrix.hpp"
#include "signa/rng.hpp"

namespace signa {

/// One word vector per vocabulary label, rows in vocabulary order.
struct EmbeddingMatrix {
    Mat matrix;          // C x d_in
    std::string source;  // "glove:<path>" or "synthetic:<seed>"

    int dim() const { return matrix.cols; }
};

/// Reads GloVe text format: one line per token, the token followed by
/// whitespace-separated reals. Only vocabulary tokens are kept.
inline EmbeddingMatrix load_word_embeddings(const std::string& path,
                                            const std::vector<std::string>& vocabulary) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding file: " + path);

    std::unordered_map<std::string, std::size_t> wanted;
    for (std::size_t i = 0; i < vocabulary.size(); ++i) wanted[vocabulary[i]] = i;

    std::vector<std::vector<double>> rows(vocabulary.size());
    std::vector<bool> found(vocabulary.size(), false);
    int dim = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        auto it = wanted.find(token);
        if (it == wanted.end()) continue;
        std::vector<double> vec;
        double v;
        while (ls >> v) vec.push_back(v);
        if (vec.empty())
            throw FormatError("embedding file line " + std::to_string(line_no) +
                              ": token '" + token + "' has no values");
        if (dim < 0) dim = static_cast<int>(vec.size());
        if (static_cast<int>(vec.size()) != dim)
            throw FormatError("embedding file line " + std::to_string(line_no) + ": token '" +
                              token + "' has " + std::to_string(vec.size()) +
                              " values, expected " + std::to_string(dim));
        rows[it->second] = std::move(vec);
        found[it->second] = true;
    }

    std::string missing;
    for (std::size_t i = 0; i < vocabulary.size(); ++i)
        if (!found[i]) missing += (missing.empty() ? "" : ", ") + vocabulary[i];
    if (!missing.empty())
        throw FormatError("embedding file is missing vocabulary tokens: " + missing);

    EmbeddingMatrix emb;
    emb.matrix = Mat(static_cast<int>(vocabulary.size()), dim);
    for (std::size_t i = 0; i < vocabulary.size(); ++i)
        for (int j = 0; j < dim; ++j) emb.matrix.at(static_cast<int>(i), j) = rows[i][j];
    emb.source = "glove:" + path;
    return emb;
}

/// Standard-normal rows, reproducible per seed; the stand-in for GloVe
/// when no embedding file is supplied.
inline EmbeddingMatrix synthetic_embeddings(std::uint64_t seed, int label_count, int dim = 300) {
    if (label_count < 1 || dim < 1)
        throw ConfigError("synthetic_embeddings: label count and dim must be positive");
    Rng rng(mix_seed(seed, 0xe1b));
    EmbeddingMatrix emb;
    emb.matrix = Mat(label_count, dim);
    for (double& v : emb.matrix.data) v = normal(rng);
    emb.source = "synthetic:" + std::to_string(seed);
    return emb;
}

}  // namespace signa
