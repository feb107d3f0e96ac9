#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <nlohmann/json_fwd.hpp>

#include "rthdc/cost.hpp"
#include "rthdc/geometry.hpp"

namespace rthdc {

// How per-bit bundling counts become class-vector bits. Exact-sum reads all
// counters back and thresholds at the controller (works across any number of
// processing groups). Preset-threshold presets each counter to
// capacity - threshold and tests saturation, which only composes within a
// single processing group.
enum class BundlingMode : std::uint8_t { ExactSum, PresetThreshold };

const char* bundling_mode_name(BundlingMode m); // "exact-sum" / "preset"
bool parse_bundling_mode(const std::string& name, BundlingMode& out);

// Fully resolved run parameters. Every output embeds the canonical JSON echo
// of this struct plus its hash, so runs are reproducible from any report.
struct RunConfig {
    std::uint64_t seed = 1;
    std::uint32_t dim = 8192;
    std::uint32_t ngram = 4;
    std::uint32_t num_pgs = 1;
    BundlingMode mode = BundlingMode::ExactSum;
    Geometry geometry;
    EnergyParams energy;

    void validate() const; // throws ConfigError

    nlohmann::ordered_json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& file);

    // FNV-1a 64 over the canonical JSON dump, as a hex string.
    std::string hash() const;
};

} // namespace rthdc
