#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>

namespace rthdc {

// Per-bit energy coefficients and device timing. Every simulated memory
// operation charges coefficient * bits_touched; a row-wide operation on a
// 512-track block touches 512 bits. Background power is charged over time.
struct EnergyParams {
    double read_pj_per_bit = 0.5;
    double write_pj_per_bit = 0.5;
    double shift_pj_per_bit = 0.3;
    double tr_pj_per_bit = 0.5;  // transverse read
    double tw_pj_per_bit = 0.8;  // transverse write (shift plus write)
    double background_mw = 212.0;
    double clock_hz = 1.0e9;

    void validate() const; // throws ConfigError on non-positive values

    nlohmann::ordered_json to_json() const;
    static EnergyParams from_json(const nlohmann::json& j); // partial overrides allowed
};

enum class EventClass { Shift, Read, Write, TrRead, TrWrite };

// Tally of charged bits per event class plus busy cycles. Merging is
// field-wise addition, so dynamic energy is linear over merges.
struct Ledger {
    std::uint64_t shift_bits = 0;
    std::uint64_t read_bits = 0;
    std::uint64_t write_bits = 0;
    std::uint64_t tr_bits = 0;
    std::uint64_t tw_bits = 0;
    std::uint64_t cycles = 0;

    void record(EventClass ev, std::uint64_t bits, std::uint64_t busy_cycles);
    Ledger& operator+=(const Ledger& o);
    friend Ledger operator+(Ledger a, const Ledger& b) { return a += b; }
    bool operator==(const Ledger&) const = default;

    nlohmann::ordered_json to_json() const;
};

double dynamic_energy_nj(const Ledger& l, const EnergyParams& p);
double background_energy_nj(std::uint64_t cycles, const EnergyParams& p);

// Total energy of a ledger: dynamic plus background over the ledger's own
// busy cycles. Linear in the ledger, so energy(a+b) == energy(a)+energy(b).
double energy_nj(const Ledger& l, const EnergyParams& p);

double latency_ns(std::uint64_t cycles, const EnergyParams& p);

// Pipeline phases used for report attribution. Encode and Bundle make up the
// encoder figure, Search the similarity-check figure, Io one-time loads.
enum class Phase { Encode = 0, Bundle = 1, Search = 2, Io = 3 };
inline constexpr std::size_t kPhaseCount = 4;
const char* phase_name(Phase p);

// Per-phase ledgers plus elapsed wall-clock cycles. Ledger cycles count
// every issued operation (busy time summed over units); elapsed cycles count
// lock-step groups once and parallel units at the slowest member, so they
// track the critical path the controller observes.
struct PhaseCosts {
    std::array<Ledger, kPhaseCount> ledgers{};
    std::array<std::uint64_t, kPhaseCount> elapsed{};

    Ledger& ledger(Phase p) { return ledgers[std::size_t(p)]; }
    const Ledger& ledger(Phase p) const { return ledgers[std::size_t(p)]; }
    void add_elapsed(Phase p, std::uint64_t c) { elapsed[std::size_t(p)] += c; }

    Ledger total_ledger() const;
    std::uint64_t total_elapsed() const;

    // Sequential composition: ledgers and elapsed both add.
    void merge_serial(const PhaseCosts& o);
    // Parallel composition: ledgers add, elapsed takes the per-phase max.
    void merge_parallel(const PhaseCosts& o);
};

// Energy/latency summary for one pipeline run, derived from PhaseCosts.
// Dynamic energy comes from the ledgers; background energy is charged once
// over total elapsed cycles and attributed to phases pro rata by elapsed
// share, so the per-phase figures still sum to the total.
struct Report {
    double encoder_nj = 0;   // Encode + Bundle phases
    double simcheck_nj = 0;  // Search phase
    double io_nj = 0;        // Io phase
    double total_nj = 0;
    double dynamic_nj = 0;
    double background_nj = 0;
    std::uint64_t cycles = 0; // total elapsed cycles
    double runtime_ns = 0;
    Ledger events;            // merged event totals (cycles = busy cycles)
    std::array<double, kPhaseCount> phase_nj{};
    std::array<std::uint64_t, kPhaseCount> phase_elapsed{};
    EnergyParams params;

    static Report build(const PhaseCosts& costs, const EnergyParams& p);
    nlohmann::ordered_json to_json() const;
};

} // namespace rthdc
