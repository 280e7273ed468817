#ifndef DRLEARN_CHECKPOINT_HPP
#define DRLEARN_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "drlearn/dbn.hpp"
#include "drlearn/matrix.hpp"
#include "drlearn/mlp.hpp"
#include "drlearn/rbm.hpp"
#include "drlearn/vae.hpp"

namespace drlearn {

/// Checkpoint container, byte layout (all integers little-endian):
///   magic "DRN1" | kind u8 | aux u32 | layer_count u32
///   | per layer: rows u32, cols u32
///   | payload: float32 parameters, per layer in order
/// kind 1 = rbm (aux = biases_enabled; payload W, visible_bias, hidden_bias)
/// kind 2 = mlp (aux = output kind;   payload W, bias per layer)
/// kind 3 = vae (aux = encoder layer count; encoder layers then decoder)
/// kind 4 = dbn (aux = 0; each layer stored like an rbm)
/// Parameters are quantized to float32; save -> load -> save is
/// byte-identical.
namespace checkpoint {

constexpr std::uint8_t kKindRbm = 1;
constexpr std::uint8_t kKindMlp = 2;
constexpr std::uint8_t kKindVae = 3;
constexpr std::uint8_t kKindDbn = 4;

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("truncated checkpoint " + path);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

inline void write_f32(std::ostream& out, double v) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    write_u32(out, bits);
}

inline double read_f32(std::istream& in, const std::string& path) {
    const std::uint32_t bits = read_u32(in, path);
    float f;
    std::memcpy(&f, &bits, 4);
    return double(f);
}

struct Header {
    std::uint8_t kind;
    std::uint32_t aux;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> dims;
};

inline void write_header(std::ostream& out, const Header& header) {
    out.write("DRN1", 4);
    out.put(char(header.kind));
    write_u32(out, header.aux);
    write_u32(out, std::uint32_t(header.dims.size()));
    for (const auto& [rows, cols] : header.dims) {
        write_u32(out, rows);
        write_u32(out, cols);
    }
}

inline Header read_header(std::istream& in, const std::string& path, std::uint8_t expected_kind) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "DRN1", 4) != 0)
        throw std::runtime_error("bad checkpoint magic in " + path);
    Header header;
    const int kind = in.get();
    if (kind == EOF) throw std::runtime_error("truncated checkpoint " + path);
    header.kind = std::uint8_t(kind);
    if (header.kind != expected_kind)
        throw std::runtime_error("checkpoint kind mismatch in " + path + ": found " +
                                 std::to_string(kind) + ", expected " + std::to_string(expected_kind));
    header.aux = read_u32(in, path);
    const std::uint32_t count = read_u32(in, path);
    if (count == 0 || count > 100000)
        throw std::runtime_error("implausible layer count in " + path);
    header.dims.resize(count);
    for (auto& [rows, cols] : header.dims) {
        rows = read_u32(in, path);
        cols = read_u32(in, path);
        if (rows == 0 || cols == 0) throw std::runtime_error("zero layer dimension in " + path);
    }
    return header;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

inline void write_rbm_payload(std::ostream& out, const Rbm& model) {
    for (std::size_t i = 0; i < model.weights.size(); ++i) write_f32(out, model.weights.data()[i]);
    for (double v : model.visible_bias) write_f32(out, v);
    for (double v : model.hidden_bias) write_f32(out, v);
}

inline Rbm read_rbm_payload(std::istream& in, const std::string& path, std::uint32_t rows,
                            std::uint32_t cols, bool biases_enabled) {
    Rbm model;
    model.weights = Matrix(rows, cols);
    model.biases_enabled = biases_enabled;
    for (std::size_t i = 0; i < model.weights.size(); ++i) model.weights.data()[i] = read_f32(in, path);
    model.visible_bias.resize(rows);
    for (double& v : model.visible_bias) v = read_f32(in, path);
    model.hidden_bias.resize(cols);
    for (double& v : model.hidden_bias) v = read_f32(in, path);
    return model;
}

inline void write_mlp_layers(std::ostream& out, const Mlp& model) {
    for (const auto& layer : model.layers) {
        for (std::size_t i = 0; i < layer.weights.size(); ++i) write_f32(out, layer.weights.data()[i]);
        for (double v : layer.bias) write_f32(out, v);
    }
}

inline Mlp::Layer read_mlp_layer(std::istream& in, const std::string& path, std::uint32_t rows,
                                 std::uint32_t cols) {
    Mlp::Layer layer;
    layer.weights = Matrix(rows, cols);
    for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = read_f32(in, path);
    layer.bias.resize(cols);
    for (double& v : layer.bias) v = read_f32(in, path);
    return layer;
}

inline void check_chaining(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& dims,
                           std::size_t first, std::size_t last, const std::string& path) {
    for (std::size_t l = first + 1; l < last; ++l)
        if (dims[l].first != dims[l - 1].second)
            throw std::runtime_error("layer dimensions do not chain in " + path);
}

} // namespace detail

inline void save(const Rbm& model, const std::string& path) {
    auto out = detail::open_out(path);
    detail::write_header(out, {kKindRbm, model.biases_enabled ? 1u : 0u,
                               {{std::uint32_t(model.n_visible()), std::uint32_t(model.n_hidden())}}});
    detail::write_rbm_payload(out, model);
}

inline Rbm load_rbm(const std::string& path) {
    auto in = detail::open_in(path);
    const auto header = detail::read_header(in, path, kKindRbm);
    if (header.dims.size() != 1) throw std::runtime_error("rbm checkpoint must have one layer: " + path);
    Rbm model = detail::read_rbm_payload(in, path, header.dims[0].first, header.dims[0].second,
                                         header.aux != 0);
    if (in.peek() != EOF) throw std::runtime_error("trailing bytes in " + path);
    return model;
}

inline void save(const Mlp& model, const std::string& path) {
    auto out = detail::open_out(path);
    detail::Header header;
    header.kind = kKindMlp;
    header.aux = std::uint32_t(model.output_kind);
    for (const auto& layer : model.layers)
        header.dims.push_back(
            {std::uint32_t(layer.weights.rows()), std::uint32_t(layer.weights.cols())});
    detail::write_header(out, header);
    detail::write_mlp_layers(out, model);
}

inline Mlp load_mlp(const std::string& path) {
    auto in = detail::open_in(path);
    const auto header = detail::read_header(in, path, kKindMlp);
    if (header.aux > 2) throw std::runtime_error("unknown mlp output kind in " + path);
    detail::check_chaining(header.dims, 0, header.dims.size(), path);
    Mlp model;
    model.output_kind = OutputKind(header.aux);
    for (const auto& [rows, cols] : header.dims)
        model.layers.push_back(detail::read_mlp_layer(in, path, rows, cols));
    if (in.peek() != EOF) throw std::runtime_error("trailing bytes in " + path);
    return model;
}

inline void save(const VaeModel& model, const std::string& path) {
    auto out = detail::open_out(path);
    detail::Header header;
    header.kind = kKindVae;
    header.aux = std::uint32_t(model.encoder.layers.size());
    for (const auto& layer : model.encoder.layers)
        header.dims.push_back(
            {std::uint32_t(layer.weights.rows()), std::uint32_t(layer.weights.cols())});
    for (const auto& layer : model.decoder.layers)
        header.dims.push_back(
            {std::uint32_t(layer.weights.rows()), std::uint32_t(layer.weights.cols())});
    detail::write_header(out, header);
    detail::write_mlp_layers(out, model.encoder);
    detail::write_mlp_layers(out, model.decoder);
}

inline VaeModel load_vae(const std::string& path) {
    auto in = detail::open_in(path);
    const auto header = detail::read_header(in, path, kKindVae);
    const std::size_t enc_count = header.aux;
    if (enc_count == 0 || enc_count >= header.dims.size())
        throw std::runtime_error("invalid encoder layer count in " + path);
    detail::check_chaining(header.dims, 0, enc_count, path);
    detail::check_chaining(header.dims, enc_count, header.dims.size(), path);
    const std::uint32_t enc_out = header.dims[enc_count - 1].second;
    const std::uint32_t dec_in = header.dims[enc_count].first;
    if (enc_out != 2 * dec_in)
        throw std::runtime_error("encoder/decoder latent dimensions disagree in " + path);

    VaeModel model;
    model.latent_dim = dec_in;
    model.encoder.output_kind = OutputKind::kLinear;
    model.decoder.output_kind = OutputKind::kSigmoid;
    for (std::size_t l = 0; l < header.dims.size(); ++l) {
        auto layer = detail::read_mlp_layer(in, path, header.dims[l].first, header.dims[l].second);
        (l < enc_count ? model.encoder : model.decoder).layers.push_back(std::move(layer));
    }
    if (in.peek() != EOF) throw std::runtime_error("trailing bytes in " + path);
    return model;
}

inline void save(const DbnStack& stack, const std::string& path) {
    auto out = detail::open_out(path);
    detail::Header header;
    header.kind = kKindDbn;
    header.aux = 0;
    for (const auto& rbm : stack.layers)
        header.dims.push_back({std::uint32_t(rbm.n_visible()), std::uint32_t(rbm.n_hidden())});
    detail::write_header(out, header);
    for (const auto& rbm : stack.layers) detail::write_rbm_payload(out, rbm);
}

inline DbnStack load_dbn(const std::string& path) {
    auto in = detail::open_in(path);
    const auto header = detail::read_header(in, path, kKindDbn);
    detail::check_chaining(header.dims, 0, header.dims.size(), path);
    DbnStack stack;
    for (const auto& [rows, cols] : header.dims)
        stack.layers.push_back(detail::read_rbm_payload(in, path, rows, cols, true));
    if (in.peek() != EOF) throw std::runtime_error("trailing bytes in " + path);
    return stack;
}

} // namespace checkpoint
} // namespace drlearn

#endif
