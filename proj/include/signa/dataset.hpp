#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "signa/label_graph.hpp"
#include "signa/tensor.hpp"

namespace signa {

enum Split : int { kTrain = 0, kVal = 1, kTest = 2 };

/// In-memory multi-label image dataset. Pixels are kept as float32 (the
/// on-disk payload type) and widened to double when tensors are built, so
/// a save/load round trip is bit-exact.
struct MultiLabelDataset {
    int channels = 0, height = 0, width = 0;
    std::vector<float> pixels;          // count * channels*height*width
    std::vector<std::uint8_t> labels;   // count * label_count
    std::vector<std::string> vocabulary;
    std::vector<int> split;             // Split per image
    std::vector<int> scene;             // scene template index, -1 when unknown

    int count() const { return static_cast<int>(split.size()); }
    int label_count() const { return static_cast<int>(vocabulary.size()); }
    std::size_t image_elems() const {
        return static_cast<std::size_t>(channels) * height * width;
    }

    std::vector<int> split_indices(int which) const {
        std::vector<int> idx;
        for (int i = 0; i < count(); ++i)
            if (split[static_cast<std::size_t>(i)] == which) idx.push_back(i);
        return idx;
    }

    /// Label sets of the selected split (-1 for the whole corpus).
    std::vector<LabelSet> label_sets(int which = -1) const {
        std::vector<LabelSet> sets;
        const int c = label_count();
        for (int i = 0; i < count(); ++i) {
            if (which >= 0 && split[static_cast<std::size_t>(i)] != which) continue;
            LabelSet s;
            for (int l = 0; l < c; ++l)
                if (labels[static_cast<std::size_t>(i) * c + l]) s.insert(l);
            sets.push_back(std::move(s));
        }
        return sets;
    }

    Tensor image_tensor(int idx) const {
        const std::size_t n = image_elems();
        std::vector<double> v(n);
        const float* src = pixels.data() + static_cast<std::size_t>(idx) * n;
        for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(src[i]);
        return Tensor({channels, height, width}, std::move(v));
    }

    const std::uint8_t* label_row(int idx) const {
        return labels.data() + static_cast<std::size_t>(idx) * label_count();
    }
};

namespace detail {

inline void write_le_f32(std::ostream& out, const std::vector<float>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(float)));
    } else {
        for (float f : v) {
            auto u = std::bit_cast<std::uint32_t>(f);
            char b[4] = {static_cast<char>(u), static_cast<char>(u >> 8),
                         static_cast<char>(u >> 16), static_cast<char>(u >> 24)};
            out.write(b, 4);
        }
    }
}

inline void read_le_f32(std::istream& in, std::vector<float>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(float)));
    } else {
        for (float& f : v) {
            unsigned char b[4];
            in.read(reinterpret_cast<char*>(b), 4);
            std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                              (static_cast<std::uint32_t>(b[1]) << 8) |
                              (static_cast<std::uint32_t>(b[2]) << 16) |
                              (static_cast<std::uint32_t>(b[3]) << 24);
            f = std::bit_cast<float>(u);
        }
    }
}

}  // namespace detail

constexpr const char* kDatasetMagic = "SIGD1";

/// Container layout: magic line, one-line JSON header, then the image
/// payload as little-endian float32 in row-major image order.
inline void save_dataset(const MultiLabelDataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset file: " + path);
    nlohmann::json header;
    header["count"] = data.count();
    header["channels"] = data.channels;
    header["height"] = data.height;
    header["width"] = data.width;
    header["vocabulary"] = data.vocabulary;
    header["labels"] = data.labels;
    header["split"] = data.split;
    header["scene"] = data.scene;
    out << kDatasetMagic << "\n" << header.dump() << "\n";
    detail::write_le_f32(out, data.pixels);
    if (!out) throw IoError("failed writing dataset file: " + path);
}

inline MultiLabelDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset file: " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != kDatasetMagic)
        throw FormatError("dataset file " + path + ": bad magic '" + magic + "'");
    std::string header_line;
    std::getline(in, header_line);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("dataset file " + path + ": bad header: " + e.what());
    }
    MultiLabelDataset data;
    data.channels = header.at("channels").get<int>();
    data.height = header.at("height").get<int>();
    data.width = header.at("width").get<int>();
    data.vocabulary = header.at("vocabulary").get<std::vector<std::string>>();
    data.labels = header.at("labels").get<std::vector<std::uint8_t>>();
    data.split = header.at("split").get<std::vector<int>>();
    data.scene = header.at("scene").get<std::vector<int>>();
    const int count = header.at("count").get<int>();
    if (count != data.count() ||
        data.labels.size() != static_cast<std::size_t>(count) * data.vocabulary.size())
        throw FormatError("dataset file " + path + ": inconsistent header sizes");
    data.pixels.resize(static_cast<std::size_t>(count) * data.image_elems());
    detail::read_le_f32(in, data.pixels);
    if (!in) throw FormatError("dataset file " + path + ": truncated pixel payload");
    return data;
}

/// Parsed multi-label CSV: header `image_id,<label>,...`, one row per image
/// with strictly binary cells.
struct LabelCsv {
    std::vector<std::string> vocabulary;
    std::vector<std::string> image_ids;
    std::vector<std::uint8_t> labels;  // row-major, count x C

    int count() const { return static_cast<int>(image_ids.size()); }
    std::vector<LabelSet> label_sets() const {
        const int c = static_cast<int>(vocabulary.size());
        std::vector<LabelSet> sets(image_ids.size());
        for (std::size_t i = 0; i < image_ids.size(); ++i)
            for (int l = 0; l < c; ++l)
                if (labels[i * static_cast<std::size_t>(c) + l]) sets[i].insert(l);
        return sets;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t start = 0;
        while (start < cell.size() && cell[start] == ' ') ++start;
        cells.push_back(cell.substr(start));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace detail

inline LabelCsv load_label_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open label CSV: " + path);
    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw FormatError("label CSV " + path + ": empty file");
    std::vector<std::string> header = detail::split_csv_line(line);
    if (header.size() < 2)
        throw FormatError("label CSV " + path + ": header needs image_id plus label columns");

    LabelCsv csv;
    csv.vocabulary.assign(header.begin() + 1, header.end());
    const std::size_t c = csv.vocabulary.size();
    std::size_t row_no = 1;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != c + 1)
            throw FormatError("label CSV " + path + " row " + std::to_string(row_no) + ": has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(c + 1));
        if (!seen.insert(cells[0]).second)
            throw FormatError("label CSV " + path + " row " + std::to_string(row_no) +
                              ": duplicate image_id '" + cells[0] + "'");
        csv.image_ids.push_back(cells[0]);
        for (std::size_t j = 0; j < c; ++j) {
            const std::string& cell = cells[j + 1];
            if (cell == "0")
                csv.labels.push_back(0);
            else if (cell == "1")
                csv.labels.push_back(1);
            else
                throw FormatError("label CSV " + path + " row " + std::to_string(row_no) +
                                  " column '" + csv.vocabulary[j] + "': non-binary cell '" +
                                  cell + "'");
        }
    }
    if (csv.image_ids.empty()) throw FormatError("label CSV " + path + ": no data rows");
    return csv;
}

}  // namespace signa
