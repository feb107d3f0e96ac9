#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>
#include <nlohmann/json_fwd.hpp>

#include "rthdc/bitvec.hpp"

namespace rthdc::model_io {

// Binary hypervector container shared by item memories and trained models.
//
//   magic   4 bytes  "RHDM"
//   version u16      1
//   flags   u16      0 (reserved)
//   dim     u32      bits per vector
//   seed    u64      item-memory seed
//   count   u32      entry count
//   entry:  u16 label length, label bytes, ceil(dim/8) payload bytes
//
// All integers little-endian; payload bits packed little-endian within each
// byte, chunk 0 first.
struct Container {
    std::uint32_t dim = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, BitVec>> entries;
};

inline constexpr char kMagic[4] = {'R', 'H', 'D', 'M'};
inline constexpr std::uint16_t kVersion = 1;

void write_container(std::ostream& out, const Container& c);
Container read_container(std::istream& in);
void write_container(const std::filesystem::path& file, const Container& c);
Container read_container(const std::filesystem::path& file);

// JSON sidecar helpers (layout descriptions, reports).
void write_json(const std::filesystem::path& file, const nlohmann::ordered_json& j);
nlohmann::json read_json(const std::filesystem::path& file);

} // namespace rthdc::model_io
