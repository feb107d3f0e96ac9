#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>
#include <nlohmann/json_fwd.hpp>

#include "rthdc/config.hpp"
#include "rthdc/corpus.hpp"
#include "rthdc/cost.hpp"
#include "rthdc/counter.hpp"
#include "rthdc/device.hpp"
#include "rthdc/hdc.hpp"
#include "rthdc/model_io.hpp"

namespace rthdc::engine {

// In-memory pipeline layout. One processing group (PG) is 16 subarrays;
// subarray j owns 512-bit chunk j of every hypervector. Within each
// subarray's cim-tile: DBCs 0..8 hold the item memory (plus spare rows for
// stored class vectors), DBC 9 is the encoder window, DBCs 10..15 hold the
// six bundling-counter digits with DBC 10 as the least significant.
inline constexpr std::uint32_t kChunksPerHv = 16;
inline constexpr std::uint32_t kImDbcCount = 9;
inline constexpr std::uint32_t kEncoderDbc = 9;
inline constexpr std::uint32_t kCounterDbcBase = 10;
inline constexpr std::uint32_t kCounterDigits = 6; // capacity 999,999 n-grams

// Similarity-search layout, one subarray per class: chunk j's class/query
// rows live in DBC j/2 at window base (j%2)*5, XOR result rows in DBC 14 at
// locations 0..15 (16..19 stay zero as TR padding), and the 4-digit distance
// counter occupies tracks 0..3 of DBC 15.
inline constexpr std::uint32_t kSearchResultDbc = 14;
inline constexpr std::uint32_t kSearchCounterDbc = 15;
inline constexpr std::uint32_t kSearchCounterDigits = 4;

// Item-memory placement: the 18 most frequent symbols sit directly under an
// access port (two per DBC), the remaining 9 one location past the lower
// port, so any fetch is at most one shift away from the DBC's resting
// alignment.
struct ImSlot {
    std::uint32_t dbc = 0;
    std::uint32_t location = 0;
    Port port = Port::Upper; // port used to access the slot
};

struct ImPlacement {
    std::array<ImSlot, hdc::kAlphabetSize> slots{};
    std::array<std::uint8_t, hdc::kAlphabetSize> rank{};

    static ImPlacement plan(const std::array<std::uint64_t, hdc::kAlphabetSize>& freq,
                            const Geometry& g);
    nlohmann::ordered_json to_json() const;
    static ImPlacement from_json(const nlohmann::json& j, const Geometry& g);
};

// Execution counters kept outside the cost ledger: item-memory fetch shift
// statistics and the constant per-character encoder script cost.
struct EngineStats {
    std::uint64_t im_fetches = 0;
    std::uint64_t im_fetch_shifts = 0;
    std::uint32_t im_fetch_shift_max = 0;
    std::uint64_t script_cycles_per_char = 0; // steady-state, per subarray
    std::uint64_t chars_consumed = 0;
    std::uint64_t ngrams_bundled = 0;

    void merge(const EngineStats& o);
    nlohmann::ordered_json to_json() const;
};

// One processing group: a 16-subarray device partition running the encoder
// micro-op schedule in lock step plus the per-bit bundling counters.
class PgUnit {
public:
    PgUnit(const RunConfig& cfg, const ImPlacement& placement);

    void load_item_memory(const hdc::ItemMemory& im, PhaseCosts& pc);

    // Clears the encoder window and presets the counters for a text that
    // will bundle `expected_ngrams` n-gram vectors.
    void begin_text(std::uint64_t expected_ngrams, PhaseCosts& pc);

    // Runs the per-character schedule: rotate the window slots, fetch the
    // symbol's chunks, and once the window is full issue the XOR transverse
    // read and feed the bundling counters. Returns the n-gram hypervector
    // when one was produced and `want_ngram` is set.
    std::optional<BitVec> consume(hdc::Symbol s, PhaseCosts& pc, bool want_ngram = false);

    // Reads every bundling counter back (per digit: one TR for the threshold
    // flag rows plus one read of the P row) and decodes per-bit counts at
    // the controller.
    std::vector<std::uint32_t> read_counts(PhaseCosts& pc);

    // Preset-threshold alternative: same readout, but each bit is the
    // saturation flag of its presaturated counter.
    BitVec read_threshold_hits(PhaseCosts& pc);

    // Stores a class vector's chunks into spare item-memory rows (class c ->
    // DBC c%9, spare row c/9) and verifies the readback.
    void store_class_vector(std::uint32_t class_index, const BitVec& hv, PhaseCosts& pc);

    std::uint64_t ngrams_seen() const { return ngrams_seen_; }
    const EngineStats& stats() const { return stats_; }
    Dbc& dbc(std::uint32_t chunk, std::uint32_t d); // exposed for tests

private:
    void bundle_increment(const std::array<BitVec, kChunksPerHv>& masks, PhaseCosts& pc);
    std::array<BitVec, 3> counter_planes(std::uint32_t chunk, std::uint32_t digit,
                                         PhaseCosts& pc, BitVec& p_row);
    template <class F> void lock_step(PhaseCosts& pc, Phase ph, F&& per_chunk);

    RunConfig cfg_;
    ImPlacement placement_;
    Device dev_;
    std::uint32_t cim_tile_;
    std::uint64_t chars_seen_ = 0;
    std::uint64_t ngrams_seen_ = 0;
    std::uint64_t expected_ngrams_ = 0;
    EngineStats stats_;
};

// Similarity-search unit: one subarray per class. Distances come out of the
// packed counter readout and must match reference Hamming distances exactly.
class SearchUnit {
public:
    SearchUnit(const RunConfig& cfg, std::uint32_t num_classes);

    void load_classes(const hdc::AssociativeMemory& am, PhaseCosts& pc);

    // Query broadcast (serialized over classes), then per class in parallel:
    // 16 XOR cimops into the result DBC, 4 TR popcount reads, sequential
    // counter accumulation; finally the serialized packed readout.
    std::vector<std::size_t> distances(const BitVec& query, PhaseCosts& pc);

    std::uint32_t num_classes() const { return num_classes_; }
    Dbc& dbc(std::uint32_t cls, std::uint32_t d); // exposed for tests

private:
    RunConfig cfg_;
    std::uint32_t num_classes_;
    Device dev_;
    std::uint32_t cim_tile_;
};

// Packs one counter's digits into a single row: 6 bits per digit, least
// significant digit first, each digit as 5 threshold-flag bits then the P
// bit; the tail is zero-filled.
BitVec pack_counter_row(std::span<const std::uint8_t> tr_counts, const BitVec& p_row,
                        std::span<const std::uint32_t> digit_tracks, std::uint32_t row_bits);

// Decodes a packed counter row back to its value.
std::uint64_t decode_packed_row(const BitVec& row, std::uint32_t digits);

struct TrainOutput {
    struct PerLanguage {
        std::string label;
        std::uint64_t symbols = 0;
        std::uint64_t ngrams = 0;
        Report report;
    };
    hdc::AssociativeMemory am;
    std::vector<PerLanguage> languages;
    PhaseCosts costs;
    Report report;
    EngineStats stats;
};

struct ClassifyOutput {
    std::string label;
    std::vector<std::pair<std::string, std::size_t>> distances;
    BitVec query;
    std::uint64_t ngrams = 0;
    PhaseCosts costs;
    Report report;
    EngineStats stats;
};

// End-to-end pipeline: orchestrates processing groups, text chunking with
// (N-1)-symbol overlap, controller-side thresholding, the search unit, and
// model serialization. Every device result is cross-checked against the
// software reference; a mismatch raises InternalError.
class Pipeline {
public:
    explicit Pipeline(const RunConfig& cfg);

    const RunConfig& config() const { return cfg_; }
    const hdc::ItemMemory& item_memory() const { return im_; }
    const hdc::AssociativeMemory& am() const { return am_; }
    const ImPlacement& placement() const;
    bool has_model() const { return !am_.empty(); }

    TrainOutput train(const corpus::Dataset& ds);

    // Loads a trained model (class-vector container + layout sidecar); the
    // setup costs are kept separate from per-query reports.
    void load_model(const model_io::Container& c, const nlohmann::json& sidecar);
    Report setup_report() const;

    ClassifyOutput classify(std::span<const hdc::Symbol> text);

    // Device-encoded hypervector of a text (cross-checked); used by tests.
    BitVec encode_text(std::span<const hdc::Symbol> text, PhaseCosts& pc,
                       std::uint64_t* ngrams_out = nullptr);

    model_io::Container to_container() const;
    nlohmann::ordered_json layout_sidecar() const;

    // Aggregated execution statistics across all processing groups.
    EngineStats stats() const;

private:
    void build_pgs();
    void build_search(std::uint32_t classes);

    RunConfig cfg_;
    hdc::ItemMemory im_;
    hdc::AssociativeMemory am_;
    std::optional<ImPlacement> placement_;
    std::vector<std::unique_ptr<PgUnit>> pgs_;
    std::unique_ptr<SearchUnit> search_;
    PhaseCosts setup_costs_;
};

} // namespace rthdc::engine
