#include "rthdc/geometry.hpp"

#include <nlohmann/json.hpp>

#include "rthdc/errors.hpp"

namespace rthdc {

void Geometry::validate() const {
    auto pos = [](std::uint64_t v, const char* name) {
        if (v == 0) throw ConfigError(std::string("geometry count must be positive: ") + name);
    };
    pos(banks, "banks");
    pos(subarrays_per_bank, "subarrays_per_bank");
    pos(tiles_per_subarray, "tiles_per_subarray");
    pos(dbcs_per_tile, "dbcs_per_tile");
    pos(tracks_per_dbc, "tracks_per_dbc");
    pos(domains_per_track, "domains_per_track");
    pos(trd, "trd");
    if (!(clock_hz > 0)) throw ConfigError("geometry clock_hz must be positive");
    if (ap_low >= domains_per_track || ap_high >= domains_per_track)
        throw ConfigError("geometry access ports must lie within domains_per_track");
    if (ap_low >= ap_high) throw ConfigError("geometry requires ap_low < ap_high");
    if (ap_high - ap_low + 1 != trd)
        throw ConfigError("geometry requires ap_high - ap_low + 1 == trd");
    if (trd > 7)
        throw ConfigError("geometry trd above 7 is not supported (three count bit-planes)");
    // Rows are stored word-wise; a 64-bit-aligned row width keeps every
    // row-parallel operation exact without partial-word edge cases.
    if (tracks_per_dbc % 64 != 0)
        throw ConfigError("geometry tracks_per_dbc must be a multiple of 64");
}

nlohmann::ordered_json Geometry::to_json() const {
    return nlohmann::ordered_json{
        {"banks", banks},
        {"subarrays_per_bank", subarrays_per_bank},
        {"tiles_per_subarray", tiles_per_subarray},
        {"dbcs_per_tile", dbcs_per_tile},
        {"tracks_per_dbc", tracks_per_dbc},
        {"domains_per_track", domains_per_track},
        {"ap_low", ap_low},
        {"ap_high", ap_high},
        {"trd", trd},
        {"clock_hz", clock_hz},
    };
}

Geometry Geometry::from_json(const nlohmann::json& j) {
    Geometry g;
    if (!j.is_object()) throw ConfigError("geometry section must be a JSON object");
    auto get_count = [&](const nlohmann::json& v, const std::string& k) {
        if (!v.is_number_unsigned()) throw ConfigError("geometry field must be a non-negative integer: " + k);
        const std::uint64_t n = v.get<std::uint64_t>();
        if (n > 0xffffffffull) throw ConfigError("geometry field out of range: " + k);
        return std::uint32_t(n);
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "banks")
            g.banks = get_count(it.value(), k);
        else if (k == "subarrays_per_bank")
            g.subarrays_per_bank = get_count(it.value(), k);
        else if (k == "tiles_per_subarray")
            g.tiles_per_subarray = get_count(it.value(), k);
        else if (k == "dbcs_per_tile")
            g.dbcs_per_tile = get_count(it.value(), k);
        else if (k == "tracks_per_dbc")
            g.tracks_per_dbc = get_count(it.value(), k);
        else if (k == "domains_per_track")
            g.domains_per_track = get_count(it.value(), k);
        else if (k == "ap_low")
            g.ap_low = get_count(it.value(), k);
        else if (k == "ap_high")
            g.ap_high = get_count(it.value(), k);
        else if (k == "trd")
            g.trd = get_count(it.value(), k);
        else if (k == "clock_hz") {
            if (!it.value().is_number()) throw ConfigError("geometry clock_hz must be a number");
            g.clock_hz = it.value().get<double>();
        } else {
            throw ConfigError("unknown geometry field: " + k);
        }
    }
    g.validate();
    return g;
}

} // namespace rthdc
