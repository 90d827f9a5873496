#include "svgdet/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "svgdet/errors.hpp"

namespace svgdet {
namespace {

constexpr char kMagic[4] = {'S', 'V', 'G', 'D'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::ostream& out, uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
void put_str(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void put_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
    put_str(out, name);
    put_u64(out, static_cast<uint64_t>(m.rows));
    put_u64(out, static_cast<uint64_t>(m.cols));
    out.write(reinterpret_cast<const char*>(m.a.data()),
              static_cast<std::streamsize>(m.a.size() * sizeof(double)));
}

uint32_t get_u32(std::istream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
uint64_t get_u64(std::istream& in) {
    uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
std::string get_str(std::istream& in) {
    uint32_t len = get_u32(in);
    if (len > (1u << 24)) throw format_error("checkpoint string length is implausible");
    std::string s(len, '\0');
    in.read(s.data(), len);
    return s;
}
Matrix get_matrix(std::istream& in) {
    uint64_t rows = get_u64(in), cols = get_u64(in);
    if (rows > (1u << 24) || cols > (1u << 24)) throw format_error("checkpoint tensor is implausible");
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    in.read(reinterpret_cast<char*>(m.a.data()),
            static_cast<std::streamsize>(m.a.size() * sizeof(double)));
    return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params, uint64_t seed,
                     const std::string& provider, const std::vector<std::string>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write checkpoint: " + path);

    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<uint32_t>(params.dim));
    put_u32(out, static_cast<uint32_t>(params.hidden));
    put_u32(out, static_cast<uint32_t>(params.classes));
    put_u64(out, seed);
    put_str(out, provider);
    out.put(params.readout == Readout::Boundary ? 1 : 0);

    put_u32(out, static_cast<uint32_t>(labels.size()));
    for (const std::string& label : labels) put_str(out, label);

    out.put(params.has_lookup ? 1 : 0);
    if (params.has_lookup) {
        put_u32(out, static_cast<uint32_t>(params.vocab.size()));
        for (const auto& [text, kind] : params.vocab) {
            put_str(out, text);
            out.put(static_cast<char>(kind));
        }
    }

    auto tensors = params.tensors();
    put_u32(out, static_cast<uint32_t>(tensors.size()));
    for (const auto& [name, tensor] : tensors) put_matrix(out, name, *tensor);
    if (!out) throw io_error("short write to checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw file_unreadable("cannot open checkpoint: " + path);

    char magic[4] = {};
    in.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw format_error("not a checkpoint file: " + path);
    uint32_t version = get_u32(in);
    if (version != kVersion)
        throw format_error("unsupported checkpoint version " + std::to_string(version));

    Checkpoint ck;
    ModelParams& p = ck.params;
    p.dim = static_cast<int>(get_u32(in));
    p.hidden = static_cast<int>(get_u32(in));
    p.classes = static_cast<int>(get_u32(in));
    ck.seed = get_u64(in);
    ck.provider = get_str(in);
    p.readout = in.get() == 1 ? Readout::Boundary : Readout::Mean;

    uint32_t label_count = get_u32(in);
    for (uint32_t i = 0; i < label_count; ++i) ck.labels.push_back(get_str(in));

    p.has_lookup = in.get() == 1;
    if (p.has_lookup) {
        uint32_t vocab_size = get_u32(in);
        for (uint32_t i = 0; i < vocab_size; ++i) {
            std::string text = get_str(in);
            TokenKind kind = static_cast<TokenKind>(in.get());
            p.vocab.emplace_back(std::move(text), kind);
        }
    }

    uint32_t tensor_count = get_u32(in);
    for (uint32_t i = 0; i < tensor_count; ++i) {
        std::string name = get_str(in);
        Matrix m = get_matrix(in);
        bool known = false;
        for (auto& [tname, tensor] : p.tensors()) {
            if (tname == name) {
                *tensor = std::move(m);
                known = true;
                break;
            }
        }
        if (!known) throw format_error("checkpoint holds unknown tensor '" + name + "'");
    }
    if (!in) throw format_error("checkpoint truncated: " + path);

    // basic shape sanity so a corrupted file fails here, not mid-inference
    if (p.w_in.rows != p.dim || p.w_in.cols != p.hidden || p.w_cwe.cols != p.classes)
        throw shape_mismatch("checkpoint tensor shapes disagree with its header");
    return ck;
}

}  // namespace svgdet
