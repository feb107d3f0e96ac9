#include "rthdc/counter.hpp"

#include "rthdc/errors.hpp"

namespace rthdc {

int digits_required(std::uint64_t capacity) {
    if (capacity < 1) throw ContractError("digits_required: capacity must be at least 1");
    int d = 1;
    while (capacity >= 10) {
        capacity /= 10;
        ++d;
    }
    return d;
}

int decode_digit(int tr_count, bool p) {
    if (tr_count < 0 || tr_count > 5)
        throw ContractError("decode_digit: count outside 0..5");
    if (!p) {
        if (tr_count == 5)
            throw ContractError("decode_digit: state error, count 5 with P clear is unreachable");
        return tr_count;
    }
    if (tr_count == 0)
        throw ContractError("decode_digit: state error, count 0 with P set is unreachable");
    return 10 - tr_count;
}

std::array<bool, 5> johnson_window(int value) {
    if (value < 0 || value > 9) throw ContractError("johnson_window: value outside 0..9");
    std::array<bool, 5> w{};
    if (value <= 4) {
        for (int j = 0; j < 5; ++j) w[j] = j < value; // k leading ones
    } else {
        const int k = value - 5;
        for (int j = 0; j < 5; ++j) w[j] = j >= k; // k leading zeros
    }
    return w;
}

bool johnson_window_valid(const std::array<bool, 5>& w) {
    for (int v = 0; v <= 9; ++v)
        if (johnson_window(v) == w) return true;
    return false;
}

int decode_window(const std::array<bool, 5>& w) {
    if (!johnson_window_valid(w))
        throw ContractError("decode_window: state error, not a Johnson state");
    int count = 0;
    for (bool b : w) count += b;
    return decode_digit(count, w[4]);
}

RtmCounter::RtmCounter(std::vector<DigitRef> digits, bool saturating)
    : digits_(std::move(digits)), saturating_(saturating) {
    if (digits_.empty()) throw ContractError("RtmCounter: needs at least one digit");
    max_ = 1;
    for (std::size_t i = 0; i < digits_.size(); ++i) {
        const DigitRef& d = digits_[i];
        if (!d.dbc) throw ContractError("RtmCounter: null digit reference");
        if (d.dbc->geometry().trd != 5)
            throw ContractError("RtmCounter: base-10 Johnson digits need a 5-domain window");
        if (d.track >= d.dbc->geometry().tracks_per_dbc)
            throw ContractError("RtmCounter: digit track out of range");
        max_ *= 10;
    }
    max_ -= 1; // 10^d - 1
}

std::array<bool, 5> RtmCounter::window(std::size_t i) const {
    const DigitRef& d = digits_[i];
    const std::uint32_t w = d.dbc->track_window_start(d.track);
    std::array<bool, 5> out{};
    for (std::uint32_t k = 0; k < 5; ++k) out[k] = d.dbc->peek(w + k, d.track);
    return out;
}

void RtmCounter::set_window(std::size_t i, const std::array<bool, 5>& w) {
    const DigitRef& d = digits_[i];
    const std::uint32_t start = d.dbc->track_window_start(d.track);
    for (std::uint32_t k = 0; k < 5; ++k) d.dbc->poke(start + k, d.track, w[k]);
}

void RtmCounter::preset(std::uint64_t value, Ledger& led) {
    if (value > max_) throw ContractError("preset: value beyond counter capacity");
    for (std::size_t i = 0; i < digits_.size(); ++i) {
        set_window(i, johnson_window(int(value % 10)));
        value /= 10;
        led.record(EventClass::Write, 5, 1);
    }
}

int RtmCounter::digit(std::size_t i) const {
    return decode_window(window(i));
}

std::uint64_t RtmCounter::value() const {
    std::uint64_t v = 0, scale = 1;
    for (std::size_t i = 0; i < digits_.size(); ++i) {
        v += std::uint64_t(digit(i)) * scale;
        scale *= 10;
    }
    return v;
}

bool RtmCounter::msd_p_bit() const {
    return window(digits_.size() - 1)[4];
}

void RtmCounter::increment(Ledger& led) {
    // A saturated counter gates further transverse writes entirely.
    if (saturating_ && value() == max_) return;
    bool carry = true;
    for (std::size_t i = 0; i < digits_.size() && carry; ++i) {
        const auto w = window(i);
        const bool p = w[4];
        carry = decode_window(w) == 9; // this digit wraps 9 -> 0
        digits_[i].dbc->tw_track(digits_[i].track, !p, led);
    }
    if (carry) throw ContractError("increment: overflow beyond counter capacity");
}

void RtmCounter::add(std::uint64_t k, Ledger& led) {
    while (k--) increment(led);
}

} // namespace rthdc
