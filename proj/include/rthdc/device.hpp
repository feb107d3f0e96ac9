#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "rthdc/bitvec.hpp"
#include "rthdc/cost.hpp"
#include "rthdc/geometry.hpp"

namespace rthdc {

// Port selector. Upper is the access port at domain index ap_low, Lower the
// one at ap_high; together they span the trd-wide transverse-read window.
enum class Port : std::uint8_t { Upper = 0, Lower = 1 };

enum class RotateDir : std::uint8_t { Left, Right };

// Coordinates within a device. The location field addresses a row inside
// the DBC; operations that take an explicit location parameter ignore it.
struct Address {
    std::uint32_t bank = 0;
    std::uint32_t subarray = 0;
    std::uint32_t tile = 0;
    std::uint32_t dbc = 0;
    std::uint32_t location = 0;
};

// One domain-wall block cluster: T parallel nanowires, each with K
// addressable bit positions. Data is stored at fixed locations 0..K-1 and
// shifting moves the wires under the fixed ports, tracked as a per-track
// offset. Location `l` sits under port `p` on track `t` iff
// port_index(p) - offset[t] == l. Overhead domains beyond the addressable
// range are abstracted away: any offset is reachable and shifting back
// restores content exactly.
//
// Lock-step operations (shift_to, read_row, write_row, rotate_read, tr_read,
// tw_masked) require all track offsets to be equal. Per-track operations
// (shift_track, tw_track) additionally require independent mode, the flag
// that marks a DBC as wired for per-nanowire shift control.
class Dbc {
public:
    explicit Dbc(const Geometry& g);

    const Geometry& geometry() const { return *g_; }

    // Aligns `location` under the selected port; returns the number of
    // single-position steps taken. Each step charges one T-bit shift event
    // and one cycle.
    std::uint32_t shift_to(std::uint32_t location, Port ap, Ledger& led);

    // Location currently under the port. Requires uniform offsets; the
    // result can be outside the addressable range if the other port was
    // aligned near an edge, so accessors validate again.
    std::int64_t location_at(Port ap) const;

    BitVec read_row(Port ap, Ledger& led) const;
    void write_row(Port ap, const BitVec& word, Ledger& led);

    // Row read with the rotate-on-read path: the returned row buffer is the
    // stored row circularly rotated by one bit position. Left moves bit i to
    // bit (i+1) mod T. Device state is unchanged.
    BitVec rotate_read(Port ap, RotateDir dir, Ledger& led) const;

    // Transverse read: per-track ones count over the window spanned by the
    // two ports. One T-bit TR event, one cycle, non-destructive. `span`
    // limits the count to the first `span` window rows (1..trd); rows past
    // the span are treated as virtual zero padding, which is how operand
    // windows narrower than trd are realized without pad writes.
    std::vector<std::uint8_t> tr_read(Ledger& led, std::uint32_t span) const;
    std::vector<std::uint8_t> tr_read(Ledger& led) const;

    // Same physical transverse read, returned as bit-sliced count planes
    // (ones, twos, fours): count[t] = ones[t] + 2*twos[t] + 4*fours[t].
    // Requires uniform offsets. Used by the CIM periphery's row-parallel
    // logic paths.
    std::array<BitVec, 3> tr_planes(Ledger& led, std::uint32_t span) const;

    // Per-nanowire shift (independent mode only). Positive delta moves the
    // track so that content previously visible at aligned location l becomes
    // visible at location l+delta. Charges |delta| one-bit shift events.
    void shift_track(std::uint32_t track, std::int32_t delta, Ledger& led);

    // Transverse write on one track: inserts `bit` at the window position
    // under the upper port, moves the intermediate window bits one position
    // toward the lower port, and returns the bit that fell off under the
    // lower port. One 1-bit TW event, one cycle. Independent mode only.
    bool tw_track(std::uint32_t track, bool bit, Ledger& led);

    // Row-parallel masked transverse write: applies tw_track semantics
    // simultaneously to every track with a 1 in `mask`, inserting that
    // track's bit from `push`. Charges popcount(mask) TW bits in one cycle.
    // Returns the dropped bits (meaningful at masked positions only).
    // Requires independent mode and uniform offsets.
    BitVec tw_masked(const BitVec& mask, const BitVec& push, Ledger& led);

    void set_independent(bool on) { independent_ = on; }
    bool independent() const { return independent_; }
    bool uniform() const { return !per_track_; }

    // Uncosted controller-visible state, used for carry/saturation mask
    // computation, result decoding checks, and tests. `window_row` is the
    // row at window position `pos` (0 = under the upper port). Requires
    // uniform offsets and a fully addressable window.
    const BitVec& window_row(std::uint32_t pos) const;

    // First location of the port window on one track (0 = under the upper
    // port), validated to be fully addressable.
    std::uint32_t track_window_start(std::uint32_t track) const;
    bool peek(std::uint32_t location, std::uint32_t track) const;
    void poke(std::uint32_t location, std::uint32_t track, bool v);
    const BitVec& row(std::uint32_t location) const;

private:
    std::int32_t offset_of(std::uint32_t track) const;
    void set_all_offsets(std::int32_t off);
    std::uint32_t checked_row_location(Port ap) const;            // uniform + in range
    std::uint32_t window_start_checked(std::uint32_t span) const; // uniform + span in range

    const Geometry* g_;
    std::vector<BitVec> rows_;                          // rows_[location], T bits each
    std::int32_t shared_off_ = 0;                       // valid when !per_track_
    std::optional<std::vector<std::int32_t>> per_track_; // engaged once tracks diverge
    bool independent_ = false;
};

// A full device: lazily materialized DBCs addressed by
// (bank, subarray, tile, dbc). All mutating calls are serialized per device;
// independent devices may run concurrently and merge ledgers afterward.
class Device {
public:
    explicit Device(const Geometry& g);

    const Geometry& geometry() const { return g_; }

    Dbc& dbc(const Address& a);
    const Dbc& dbc(const Address& a) const;
    Dbc& dbc(std::uint32_t bank, std::uint32_t subarray, std::uint32_t tile, std::uint32_t d);

private:
    std::size_t flat_index(const Address& a) const; // validates bounds

    Geometry g_;
    mutable std::vector<std::unique_ptr<Dbc>> dbcs_;
};

} // namespace rthdc
