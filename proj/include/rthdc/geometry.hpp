#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>

namespace rthdc {

// Array hierarchy parameters: banks hold subarrays, subarrays hold tiles,
// tiles hold DBCs (domain-wall block clusters), a DBC is tracks_per_dbc
// parallel nanowires of domains_per_track addressable bit positions each.
// Two access ports per nanowire sit at domain indices ap_low and ap_high;
// their inclusive span is the transverse-read distance trd.
struct Geometry {
    std::uint32_t banks = 2;
    std::uint32_t subarrays_per_bank = 64;
    std::uint32_t tiles_per_subarray = 16;
    std::uint32_t dbcs_per_tile = 16;
    std::uint32_t tracks_per_dbc = 512;   // T
    std::uint32_t domains_per_track = 32; // K, addressable locations
    std::uint32_t ap_low = 13;
    std::uint32_t ap_high = 17;
    std::uint32_t trd = 5;
    double clock_hz = 1.0e9;

    void validate() const; // throws ConfigError

    nlohmann::ordered_json to_json() const;
    static Geometry from_json(const nlohmann::json& j); // partial overrides allowed

    std::uint32_t port_index(bool lower) const { return lower ? ap_high : ap_low; }
};

} // namespace rthdc
