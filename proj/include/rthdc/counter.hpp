#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rthdc/cost.hpp"
#include "rthdc/device.hpp"

namespace rthdc {

// Base-10 Johnson counters built from independently shifted nanowire
// windows. One decimal digit lives in the 5-domain port window of a single
// track: its reachable states are k leading 1s then 0s (value k, P bit 0)
// or k leading 0s then 1s (value 5+k, P bit 1), where the P bit is the
// window position under the lower port. A unit increment transverse-writes
// the complement of P, advancing the Johnson cycle by one state.

// Number of decimal digits (nanowires) needed to count 0..capacity.
int digits_required(std::uint64_t capacity);

// Digit value from a transverse-read count plus the P bit. Rejects the
// inconsistent pairs (count 5 with P clear, count 0 with P set).
int decode_digit(int tr_count, bool p);

// Johnson window content for a digit value 0..9; index 0 is the position
// under the upper port, index 4 the P position.
std::array<bool, 5> johnson_window(int value);
bool johnson_window_valid(const std::array<bool, 5>& w);
int decode_window(const std::array<bool, 5>& w);

// One digit = one track of a DBC whose ports span a 5-domain window.
struct DigitRef {
    Dbc* dbc = nullptr;
    std::uint32_t track = 0;
};

// Multi-digit counter, least significant digit first. Carries are
// controller-mediated: a digit wrapping 9 -> 0 during an increment triggers
// one increment of the next digit. In saturating mode the counter freezes
// at its capacity and ignores further increments; otherwise incrementing
// past the capacity is an overflow error.
class RtmCounter {
public:
    RtmCounter(std::vector<DigitRef> digits, bool saturating);

    std::size_t digit_count() const { return digits_.size(); }
    std::uint64_t max_value() const { return max_; }
    bool saturating() const { return saturating_; }

    // Controller-level preset: writes the Johnson encoding of each decimal
    // digit directly; one 5-bit write event per digit.
    void preset(std::uint64_t value, Ledger& led);

    void increment(Ledger& led);
    void add(std::uint64_t k, Ledger& led); // k unit increments

    // Uncosted controller-side decode of the current state.
    std::uint64_t value() const;
    int digit(std::size_t i) const;

    // True iff the counter sits at capacity; with preset max-T this is
    // equivalent to "at least T increments seen".
    bool threshold_hit() const { return value() == max_; }

    // P bit of the most significant digit, exposed as a diagnostic only.
    bool msd_p_bit() const;

private:
    std::array<bool, 5> window(std::size_t i) const;
    void set_window(std::size_t i, const std::array<bool, 5>& w);

    std::vector<DigitRef> digits_;
    std::uint64_t max_;
    bool saturating_;
};

} // namespace rthdc
