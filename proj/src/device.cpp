#include "rthdc/device.hpp"

#include <cstdlib>

#include "rthdc/errors.hpp"

namespace rthdc {

Dbc::Dbc(const Geometry& g) : g_(&g), rows_(g.domains_per_track, BitVec(g.tracks_per_dbc)) {}

std::int32_t Dbc::offset_of(std::uint32_t track) const {
    return per_track_ ? (*per_track_)[track] : shared_off_;
}

void Dbc::set_all_offsets(std::int32_t off) {
    shared_off_ = off;
    per_track_.reset();
}

static void require_uniform(const Dbc& d, const char* what) {
    if (!d.uniform())
        throw ContractError(std::string(what) + ": alignment error, track offsets diverged");
}

std::uint32_t Dbc::shift_to(std::uint32_t location, Port ap, Ledger& led) {
    if (location >= g_->domains_per_track)
        throw ContractError("shift_to: alignment error, location beyond addressable range");
    require_uniform(*this, "shift_to");
    const std::int32_t target = std::int32_t(g_->port_index(ap == Port::Lower)) - std::int32_t(location);
    const std::uint32_t steps = std::uint32_t(std::abs(target - shared_off_));
    if (steps)
        led.record(EventClass::Shift, std::uint64_t(steps) * g_->tracks_per_dbc, steps);
    shared_off_ = target;
    return steps;
}

std::int64_t Dbc::location_at(Port ap) const {
    require_uniform(*this, "location_at");
    return std::int64_t(g_->port_index(ap == Port::Lower)) - shared_off_;
}

std::uint32_t Dbc::checked_row_location(Port ap) const {
    require_uniform(*this, "row access");
    const std::int64_t loc = location_at(ap);
    if (loc < 0 || loc >= std::int64_t(g_->domains_per_track))
        throw ContractError("row access: alignment error, no addressable location under port");
    return std::uint32_t(loc);
}

BitVec Dbc::read_row(Port ap, Ledger& led) const {
    const std::uint32_t loc = checked_row_location(ap);
    led.record(EventClass::Read, g_->tracks_per_dbc, 1);
    return rows_[loc];
}

void Dbc::write_row(Port ap, const BitVec& word, Ledger& led) {
    if (word.size() != g_->tracks_per_dbc)
        throw ContractError("write_row: row width mismatch");
    const std::uint32_t loc = checked_row_location(ap);
    led.record(EventClass::Write, g_->tracks_per_dbc, 1);
    rows_[loc] = word;
}

BitVec Dbc::rotate_read(Port ap, RotateDir dir, Ledger& led) const {
    const std::uint32_t loc = checked_row_location(ap);
    led.record(EventClass::Read, g_->tracks_per_dbc, 1);
    return dir == RotateDir::Left ? rows_[loc].rotated_left(1, g_->tracks_per_dbc)
                                  : rows_[loc].rotated_right(1, g_->tracks_per_dbc);
}

std::uint32_t Dbc::window_start_checked(std::uint32_t span) const {
    require_uniform(*this, "transverse window");
    if (span < 1 || span > g_->trd)
        throw ContractError("transverse window: span must be within 1..trd");
    const std::int64_t w = std::int64_t(g_->ap_low) - shared_off_;
    if (w < 0 || w + span > g_->domains_per_track)
        throw ContractError("transverse window: alignment error, window not fully addressable");
    return std::uint32_t(w);
}

std::array<BitVec, 3> Dbc::tr_planes(Ledger& led, std::uint32_t span) const {
    const std::uint32_t w = window_start_checked(span);
    const std::size_t words = rows_[0].word_count();
    std::vector<std::uint64_t> ones(words, 0), twos(words, 0), fours(words, 0);
    for (std::uint32_t k = 0; k < span; ++k) {
        const auto& rw = rows_[w + k].words();
        for (std::size_t i = 0; i < words; ++i) {
            const std::uint64_t r = rw[i];
            const std::uint64_t c1 = ones[i] & r;
            ones[i] ^= r;
            const std::uint64_t c2 = twos[i] & c1;
            twos[i] ^= c1;
            fours[i] |= c2;
        }
    }
    led.record(EventClass::TrRead, g_->tracks_per_dbc, 1);
    std::array<BitVec, 3> planes{BitVec(g_->tracks_per_dbc), BitVec(g_->tracks_per_dbc),
                                 BitVec(g_->tracks_per_dbc)};
    for (std::size_t i = 0; i < words; ++i) {
        planes[0].set_word(i, ones[i]);
        planes[1].set_word(i, twos[i]);
        planes[2].set_word(i, fours[i]);
    }
    return planes;
}

std::vector<std::uint8_t> Dbc::tr_read(Ledger& led, std::uint32_t span) const {
    const std::uint32_t T = g_->tracks_per_dbc;
    std::vector<std::uint8_t> counts(T, 0);
    if (uniform()) {
        const auto planes = tr_planes(led, span);
        for (std::uint32_t t = 0; t < T; ++t)
            counts[t] = std::uint8_t(planes[0].get(t) + 2 * planes[1].get(t) + 4 * planes[2].get(t));
        return counts;
    }
    // Diverged tracks read their own window between the ports.
    if (span < 1 || span > g_->trd)
        throw ContractError("tr_read: span must be within 1..trd");
    for (std::uint32_t t = 0; t < T; ++t) {
        const std::int64_t w = std::int64_t(g_->ap_low) - offset_of(t);
        if (w < 0 || w + span > g_->domains_per_track)
            throw ContractError("tr_read: alignment error, window not fully addressable");
        std::uint8_t c = 0;
        for (std::uint32_t k = 0; k < span; ++k) c += rows_[std::size_t(w) + k].get(t);
        counts[t] = c;
    }
    led.record(EventClass::TrRead, T, 1);
    return counts;
}

std::vector<std::uint8_t> Dbc::tr_read(Ledger& led) const { return tr_read(led, g_->trd); }

void Dbc::shift_track(std::uint32_t track, std::int32_t delta, Ledger& led) {
    if (!independent_)
        throw ContractError("shift_track: mode error, DBC is in lock-step mode");
    if (track >= g_->tracks_per_dbc) throw ContractError("shift_track: track out of range");
    if (delta == 0) return;
    if (!per_track_) per_track_.emplace(g_->tracks_per_dbc, shared_off_);
    (*per_track_)[track] += delta;
    const std::uint32_t steps = std::uint32_t(std::abs(delta));
    led.record(EventClass::Shift, steps, steps);
    // Collapse back to the lock-step representation if tracks re-converged.
    for (std::int32_t off : *per_track_)
        if (off != (*per_track_)[0]) return;
    set_all_offsets((*per_track_)[0]);
}

bool Dbc::tw_track(std::uint32_t track, bool bit, Ledger& led) {
    if (!independent_)
        throw ContractError("tw_track: mode error, DBC is in lock-step mode");
    if (track >= g_->tracks_per_dbc) throw ContractError("tw_track: track out of range");
    const std::int64_t w = std::int64_t(g_->ap_low) - offset_of(track);
    if (w < 0 || w + g_->trd > g_->domains_per_track)
        throw ContractError("tw_track: alignment error, window not fully addressable");
    const std::size_t base = std::size_t(w);
    const bool dropped = rows_[base + g_->trd - 1].get(track);
    for (std::uint32_t k = g_->trd - 1; k >= 1; --k)
        rows_[base + k].set(track, rows_[base + k - 1].get(track));
    rows_[base].set(track, bit);
    led.record(EventClass::TrWrite, 1, 1);
    return dropped;
}

BitVec Dbc::tw_masked(const BitVec& mask, const BitVec& push, Ledger& led) {
    if (!independent_)
        throw ContractError("tw_masked: mode error, DBC is in lock-step mode");
    if (mask.size() != g_->tracks_per_dbc || push.size() != g_->tracks_per_dbc)
        throw ContractError("tw_masked: row width mismatch");
    const std::uint32_t w = window_start_checked(g_->trd);
    const BitVec keep = ~mask;
    const BitVec dropped = rows_[w + g_->trd - 1] & mask;
    for (std::uint32_t k = g_->trd - 1; k >= 1; --k)
        rows_[w + k] = (rows_[w + k] & keep) | (rows_[w + k - 1] & mask);
    rows_[w] = (rows_[w] & keep) | (push & mask);
    led.record(EventClass::TrWrite, mask.popcount(), 1);
    return dropped;
}

const BitVec& Dbc::window_row(std::uint32_t pos) const {
    if (pos >= g_->trd) throw ContractError("window_row: position beyond window");
    return rows_[window_start_checked(g_->trd) + pos];
}

std::uint32_t Dbc::track_window_start(std::uint32_t track) const {
    if (track >= g_->tracks_per_dbc) throw ContractError("track_window_start: track out of range");
    const std::int64_t w = std::int64_t(g_->ap_low) - offset_of(track);
    if (w < 0 || w + g_->trd > g_->domains_per_track)
        throw ContractError("track_window_start: window not fully addressable");
    return std::uint32_t(w);
}

bool Dbc::peek(std::uint32_t location, std::uint32_t track) const {
    if (location >= g_->domains_per_track || track >= g_->tracks_per_dbc)
        throw ContractError("peek: out of range");
    return rows_[location].get(track);
}

void Dbc::poke(std::uint32_t location, std::uint32_t track, bool v) {
    if (location >= g_->domains_per_track || track >= g_->tracks_per_dbc)
        throw ContractError("poke: out of range");
    rows_[location].set(track, v);
}

const BitVec& Dbc::row(std::uint32_t location) const {
    if (location >= g_->domains_per_track) throw ContractError("row: out of range");
    return rows_[location];
}

Device::Device(const Geometry& g) : g_(g) {
    g_.validate();
    const std::size_t total = std::size_t(g_.banks) * g_.subarrays_per_bank *
                              g_.tiles_per_subarray * g_.dbcs_per_tile;
    dbcs_.resize(total);
}

std::size_t Device::flat_index(const Address& a) const {
    if (a.bank >= g_.banks || a.subarray >= g_.subarrays_per_bank ||
        a.tile >= g_.tiles_per_subarray || a.dbc >= g_.dbcs_per_tile)
        throw ContractError("device address out of range");
    return ((std::size_t(a.bank) * g_.subarrays_per_bank + a.subarray) * g_.tiles_per_subarray +
            a.tile) *
               g_.dbcs_per_tile +
           a.dbc;
}

Dbc& Device::dbc(const Address& a) {
    auto& slot = dbcs_[flat_index(a)];
    if (!slot) slot = std::make_unique<Dbc>(g_);
    return *slot;
}

const Dbc& Device::dbc(const Address& a) const {
    auto& slot = dbcs_[flat_index(a)];
    if (!slot) slot = std::make_unique<Dbc>(g_);
    return *slot;
}

Dbc& Device::dbc(std::uint32_t bank, std::uint32_t subarray, std::uint32_t tile, std::uint32_t d) {
    return dbc(Address{bank, subarray, tile, d});
}

} // namespace rthdc
