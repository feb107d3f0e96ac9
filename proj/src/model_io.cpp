#include "rthdc/model_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "rthdc/errors.hpp"

namespace rthdc::model_io {

namespace {

void put_u16(std::ostream& out, std::uint16_t v) {
    const char b[2] = {char(v & 0xff), char(v >> 8)};
    out.write(b, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = char((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

std::uint64_t get_uint(std::istream& in, int bytes, const char* what) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), bytes);
    if (!in) throw ConfigError(std::string("model container truncated reading ") + what);
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

} // namespace

void write_container(std::ostream& out, const Container& c) {
    if (c.dim == 0) throw ContractError("write_container: zero dimensionality");
    if (c.entries.size() > 0xffffffffull) throw ContractError("write_container: too many entries");
    out.write(kMagic, 4);
    put_u16(out, kVersion);
    put_u16(out, 0);
    put_u32(out, c.dim);
    put_u64(out, c.seed);
    put_u32(out, std::uint32_t(c.entries.size()));
    for (const auto& [label, hv] : c.entries) {
        if (label.size() > 0xffff) throw ContractError("write_container: label too long");
        if (hv.size() != c.dim) throw ContractError("write_container: entry dimension mismatch");
        put_u16(out, std::uint16_t(label.size()));
        out.write(label.data(), std::streamsize(label.size()));
        const auto payload = hv.to_bytes();
        out.write(reinterpret_cast<const char*>(payload.data()), std::streamsize(payload.size()));
    }
    if (!out) throw ConfigError("model container write failed");
}

Container read_container(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != std::string_view(kMagic, 4))
        throw ConfigError("not a model container");
    const auto version = get_uint(in, 2, "version");
    if (version != kVersion)
        throw ConfigError("unsupported model container version " + std::to_string(version));
    get_uint(in, 2, "flags");
    Container c;
    c.dim = std::uint32_t(get_uint(in, 4, "dim"));
    if (c.dim == 0) throw ConfigError("model container has zero dimensionality");
    c.seed = get_uint(in, 8, "seed");
    const auto count = get_uint(in, 4, "count");
    const std::size_t payload_bytes = (std::size_t(c.dim) + 7) / 8;
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto label_len = get_uint(in, 2, "label length");
        std::string label(label_len, '\0');
        in.read(label.data(), std::streamsize(label_len));
        std::vector<std::uint8_t> payload(payload_bytes);
        in.read(reinterpret_cast<char*>(payload.data()), std::streamsize(payload_bytes));
        if (!in) throw ConfigError("model container truncated reading entry " + std::to_string(i));
        c.entries.emplace_back(std::move(label),
                               BitVec::from_bytes(payload.data(), payload.size(), c.dim));
    }
    return c;
}

void write_container(const std::filesystem::path& file, const Container& c) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write model file: " + file.string());
    write_container(out, c);
}

Container read_container(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read model file: " + file.string());
    try {
        return read_container(in);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()) + ": " + file.string());
    }
}

void write_json(const std::filesystem::path& file, const nlohmann::ordered_json& j) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + file.string());
    out << j.dump(2) << '\n';
    if (!out) throw ConfigError("write failed: " + file.string());
}

nlohmann::json read_json(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read file: " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid JSON in " + file.string() + ": " + e.what());
    }
    return j;
}

} // namespace rthdc::model_io
