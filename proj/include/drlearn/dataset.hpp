#ifndef DRLEARN_DATASET_HPP
#define DRLEARN_DATASET_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "drlearn/matrix.hpp"
#include "drlearn/rng.hpp"

namespace drlearn {

/// Labeled examples: one row per example, feature values in [0,1],
/// labels in [0, n_classes).
struct LabeledDataset {
    Matrix inputs;
    std::vector<int> labels;
    int n_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return inputs.cols(); }
};

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("truncated IDX header in " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

inline std::ifstream open_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

} // namespace detail

/// MNIST-style IDX loader. Big-endian headers, magic 0x00000803 for image
/// files and 0x00000801 for label files; pixels scaled to [0,1] by /255.
inline LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    auto img = detail::open_binary(images_path);
    const std::uint32_t img_magic = detail::read_be32(img, images_path);
    if (img_magic != 2051)
        throw std::runtime_error("bad IDX image magic " + std::to_string(img_magic) + " in " + images_path);
    const std::uint32_t n_images = detail::read_be32(img, images_path);
    const std::uint32_t rows = detail::read_be32(img, images_path);
    const std::uint32_t cols = detail::read_be32(img, images_path);

    auto lab = detail::open_binary(labels_path);
    const std::uint32_t lab_magic = detail::read_be32(lab, labels_path);
    if (lab_magic != 2049)
        throw std::runtime_error("bad IDX label magic " + std::to_string(lab_magic) + " in " + labels_path);
    const std::uint32_t n_labels = detail::read_be32(lab, labels_path);
    if (n_images != n_labels)
        throw std::runtime_error("IDX image/label count mismatch: " + std::to_string(n_images) + " vs " +
                                 std::to_string(n_labels));

    LabeledDataset ds;
    const std::size_t dim = std::size_t(rows) * cols;
    ds.inputs = Matrix(n_images, dim);
    ds.labels.resize(n_images);

    std::vector<unsigned char> buf(dim);
    for (std::uint32_t k = 0; k < n_images; ++k) {
        img.read(reinterpret_cast<char*>(buf.data()), std::streamsize(dim));
        if (!img) throw std::runtime_error("truncated IDX image data in " + images_path);
        double* out = ds.inputs.row(k);
        for (std::size_t i = 0; i < dim; ++i) out[i] = buf[i] / 255.0;
    }
    for (std::uint32_t k = 0; k < n_labels; ++k) {
        unsigned char byte;
        lab.read(reinterpret_cast<char*>(&byte), 1);
        if (!lab) throw std::runtime_error("truncated IDX label data in " + labels_path);
        ds.labels[k] = byte;
        ds.n_classes = std::max(ds.n_classes, int(byte) + 1);
    }
    return ds;
}

/// CIFAR-10 binary batches: 3073-byte records (1 label byte + 3072 pixels),
/// pixels scaled to [0,1].
inline LabeledDataset load_cifar10_binary(const std::vector<std::string>& paths) {
    constexpr std::size_t kRecord = 3073;
    constexpr std::size_t kPixels = 3072;

    std::size_t total = 0;
    for (const auto& path : paths) {
        auto in = detail::open_binary(path);
        in.seekg(0, std::ios::end);
        const auto len = static_cast<std::size_t>(in.tellg());
        if (len % kRecord != 0)
            throw std::runtime_error("CIFAR file length " + std::to_string(len) + " not a multiple of 3073: " + path);
        total += len / kRecord;
    }

    LabeledDataset ds;
    ds.inputs = Matrix(total, kPixels);
    ds.labels.resize(total);
    ds.n_classes = 10;

    std::size_t k = 0;
    std::vector<unsigned char> rec(kRecord);
    for (const auto& path : paths) {
        auto in = detail::open_binary(path);
        while (in.read(reinterpret_cast<char*>(rec.data()), kRecord)) {
            if (rec[0] >= 10)
                throw std::runtime_error("CIFAR label " + std::to_string(rec[0]) + " out of range in " + path);
            ds.labels[k] = rec[0];
            double* out = ds.inputs.row(k);
            for (std::size_t i = 0; i < kPixels; ++i) out[i] = rec[i + 1] / 255.0;
            ++k;
        }
    }
    return ds;
}

/// Threshold every feature to {0,1} (>= threshold maps to 1). Idempotent.
inline LabeledDataset binarize(const LabeledDataset& ds, double threshold) {
    if (threshold < 0.0 || threshold > 1.0)
        throw std::invalid_argument("binarize: threshold must be in [0,1]");
    LabeledDataset out = ds;
    double* v = out.inputs.data();
    for (std::size_t i = 0; i < out.inputs.size(); ++i) v[i] = v[i] >= threshold ? 1.0 : 0.0;
    return out;
}

/// Synthetic Gaussian blobs, one cluster per class, clipped to [0,1]^dim.
/// Larger `separation` shrinks within-class spread relative to the box.
inline LabeledDataset synth_blobs(std::size_t n_per_class, int n_classes, std::size_t dim,
                                  double separation, Rng& rng) {
    if (n_per_class < 1 || n_classes < 1 || dim < 1)
        throw std::invalid_argument("synth_blobs: counts must be >= 1");
    const double spread = 0.25 / std::max(separation, 1e-9);

    Matrix centers(n_classes, dim);
    for (std::size_t i = 0; i < centers.size(); ++i)
        centers.data()[i] = 0.25 + 0.5 * rng.uniform();

    LabeledDataset ds;
    ds.inputs = Matrix(n_per_class * n_classes, dim);
    ds.labels.resize(n_per_class * n_classes);
    ds.n_classes = n_classes;
    std::size_t k = 0;
    for (int c = 0; c < n_classes; ++c) {
        for (std::size_t s = 0; s < n_per_class; ++s, ++k) {
            ds.labels[k] = c;
            double* out = ds.inputs.row(k);
            for (std::size_t d = 0; d < dim; ++d)
                out[d] = std::clamp(centers(c, d) + spread * rng.gaussian(), 0.0, 1.0);
        }
    }
    return ds;
}

/// Rows `first..first+count` as a new dataset (deterministic split primitive;
/// the conventional train/validation split takes the leading block).
inline LabeledDataset slice(const LabeledDataset& ds, std::size_t first, std::size_t count) {
    if (first + count > ds.size()) throw std::out_of_range("slice: range exceeds dataset");
    LabeledDataset out;
    out.inputs = Matrix(count, ds.dim());
    out.labels.assign(ds.labels.begin() + first, ds.labels.begin() + first + count);
    out.n_classes = ds.n_classes;
    for (std::size_t k = 0; k < count; ++k)
        std::copy(ds.inputs.row(first + k), ds.inputs.row(first + k) + ds.dim(), out.inputs.row(k));
    return out;
}

/// Seeded permutation of the rows.
inline LabeledDataset shuffled(const LabeledDataset& ds, Rng& rng) {
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_index(i)]);

    LabeledDataset out;
    out.inputs = Matrix(ds.size(), ds.dim());
    out.labels.resize(ds.size());
    out.n_classes = ds.n_classes;
    for (std::size_t k = 0; k < ds.size(); ++k) {
        out.labels[k] = ds.labels[order[k]];
        std::copy(ds.inputs.row(order[k]), ds.inputs.row(order[k]) + ds.dim(), out.inputs.row(k));
    }
    return out;
}

} // namespace drlearn

#endif
