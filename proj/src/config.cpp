#include "rthdc/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "rthdc/errors.hpp"
#include "rthdc/hdc.hpp"

namespace rthdc {

const char* bundling_mode_name(BundlingMode m) {
    return m == BundlingMode::ExactSum ? "exact-sum" : "preset";
}

bool parse_bundling_mode(const std::string& name, BundlingMode& out) {
    if (name == "exact-sum")
        out = BundlingMode::ExactSum;
    else if (name == "preset")
        out = BundlingMode::PresetThreshold;
    else
        return false;
    return true;
}

void RunConfig::validate() const {
    if (dim == 0 || dim % hdc::kChunkBits != 0)
        throw ConfigError("dim must be a positive multiple of 512");
    if (ngram < 1) throw ConfigError("ngram must be at least 1");
    if (ngram > geometry.trd)
        throw ConfigError("ngram cannot exceed the transverse window width (trd)");
    if (num_pgs < 1) throw ConfigError("num_pgs must be at least 1");
    if (mode == BundlingMode::PresetThreshold && num_pgs > 1)
        throw ConfigError("preset bundling mode only supports a single processing group");
    geometry.validate();
    energy.validate();
}

nlohmann::ordered_json RunConfig::to_json() const {
    return nlohmann::ordered_json{
        {"seed", seed},
        {"dim", dim},
        {"ngram", ngram},
        {"num_pgs", num_pgs},
        {"bundling_mode", bundling_mode_name(mode)},
        {"geometry", geometry.to_json()},
        {"energy", energy.to_json()},
    };
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    bool energy_clock_given = false;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "seed") {
            if (!it.value().is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
            c.seed = it.value().get<std::uint64_t>();
        } else if (k == "dim") {
            if (!it.value().is_number_unsigned()) throw ConfigError("dim must be a non-negative integer");
            c.dim = it.value().get<std::uint32_t>();
        } else if (k == "ngram") {
            if (!it.value().is_number_unsigned()) throw ConfigError("ngram must be a non-negative integer");
            c.ngram = it.value().get<std::uint32_t>();
        } else if (k == "num_pgs") {
            if (!it.value().is_number_unsigned()) throw ConfigError("num_pgs must be a non-negative integer");
            c.num_pgs = it.value().get<std::uint32_t>();
        } else if (k == "bundling_mode") {
            if (!it.value().is_string() || !parse_bundling_mode(it.value().get<std::string>(), c.mode))
                throw ConfigError("bundling_mode must be \"exact-sum\" or \"preset\"");
        } else if (k == "geometry") {
            c.geometry = Geometry::from_json(it.value());
        } else if (k == "energy") {
            c.energy = EnergyParams::from_json(it.value());
            energy_clock_given = it.value().contains("clock_hz");
        } else {
            throw ConfigError("unknown config field: " + k);
        }
    }
    // One device, one clock: the energy section inherits the geometry clock
    // unless it explicitly overrides it.
    if (!energy_clock_given) c.energy.clock_hz = c.geometry.clock_hz;
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file: " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
    }
    return from_json(j);
}

std::string RunConfig::hash() const {
    const std::string dump = to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace rthdc
