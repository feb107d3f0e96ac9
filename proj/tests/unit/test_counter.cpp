#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <vector>

#include "rthdc/counter.hpp"
#include "rthdc/errors.hpp"
#include "rthdc/geometry.hpp"

using namespace rthdc;

namespace {

struct CounterRig {
    Geometry g{};
    std::unique_ptr<Dbc> dbc;
    Ledger led;

    explicit CounterRig() : dbc(std::make_unique<Dbc>(g)) { dbc->set_independent(true); }

    RtmCounter make(int digits, bool saturating) {
        std::vector<DigitRef> refs;
        for (int i = 0; i < digits; ++i) refs.push_back({dbc.get(), std::uint32_t(i)});
        return RtmCounter(std::move(refs), saturating);
    }
};

} // namespace

TEST_CASE("digits_required") {
    CHECK_THROWS_AS(digits_required(0), ContractError);
    CHECK(digits_required(1) == 1);
    CHECK(digits_required(9) == 1);
    CHECK(digits_required(10) == 2);
    CHECK(digits_required(99) == 2);
    CHECK(digits_required(100) == 3);
    CHECK(digits_required(999999) == 6);
    CHECK(digits_required(1000000) == 7);
}

TEST_CASE("johnson window encoding round-trips all ten values") {
    for (int v = 0; v <= 9; ++v) {
        const auto w = johnson_window(v);
        CHECK(johnson_window_valid(w));
        CHECK(decode_window(w) == v);
        int ones = 0;
        for (bool b : w) ones += b;
        // P bit is the last window position; count determines the rest.
        const bool p = w[4];
        CHECK(decode_digit(ones, p) == v);
        if (v < 5) {
            CHECK_FALSE(p);
            CHECK(ones == v);
        } else {
            CHECK(p);
            CHECK(ones == 5 - (v - 5));
        }
    }
    CHECK_THROWS_AS(decode_digit(5, false), ContractError);
    CHECK_THROWS_AS(decode_digit(0, true), ContractError);
    CHECK_THROWS_AS(decode_digit(6, true), ContractError);
    // A non-Johnson pattern (alternating) is invalid.
    CHECK_FALSE(johnson_window_valid({true, false, true, false, true}));
}

TEST_CASE("three-digit counter exhaustively counts 0..999") {
    CounterRig rig;
    RtmCounter c = rig.make(3, false);
    c.preset(0, rig.led);
    CHECK(c.value() == 0);
    CHECK(c.max_value() == 999);
    for (int i = 1; i <= 999; ++i) {
        c.increment(rig.led);
        REQUIRE(c.value() == std::uint64_t(i));
    }
    CHECK(c.threshold_hit());
    CHECK_THROWS_AS(c.increment(rig.led), ContractError);
}

TEST_CASE("increment costs one TW per touched digit") {
    CounterRig rig;
    RtmCounter c = rig.make(3, false);
    c.preset(0, rig.led);
    Ledger probe;
    c.increment(probe); // 0 -> 1, one digit touched
    CHECK(probe.tw_bits == 1);
    c.preset(9, rig.led);
    probe = Ledger{};
    c.increment(probe); // 9 -> 10, carry into the second digit
    CHECK(probe.tw_bits == 2);
    CHECK(c.value() == 10);
    c.preset(99, rig.led);
    probe = Ledger{};
    c.increment(probe); // 99 -> 100, double carry
    CHECK(probe.tw_bits == 3);
    CHECK(c.value() == 100);
}

TEST_CASE("preset writes each digit window directly") {
    CounterRig rig;
    RtmCounter c = rig.make(4, false);
    Ledger probe;
    c.preset(4083, probe);
    CHECK(c.value() == 4083);
    CHECK(c.digit(0) == 3);
    CHECK(c.digit(1) == 8);
    CHECK(c.digit(2) == 0);
    CHECK(c.digit(3) == 4);
    CHECK(probe.write_bits == 4 * 5);
    CHECK_THROWS_AS(c.preset(10000, probe), ContractError);
}

TEST_CASE("saturating counter freezes at capacity") {
    CounterRig rig;
    RtmCounter c = rig.make(2, true);
    for (std::uint64_t t = 1; t <= 99; ++t) {
        c.preset(99 - t, rig.led); // capacity minus threshold
        for (std::uint64_t i = 0; i < t + 25; ++i) {
            const bool expect_hit = i >= t;
            CHECK(c.threshold_hit() == expect_hit);
            c.increment(rig.led);
        }
        CHECK(c.value() == 99);
        CHECK(c.threshold_hit());
    }
}

TEST_CASE("saturated increments cost nothing") {
    CounterRig rig;
    RtmCounter c = rig.make(2, true);
    c.preset(99, rig.led);
    Ledger probe;
    c.increment(probe);
    CHECK(probe.tw_bits == 0);
    CHECK(probe.cycles == 0);
    CHECK(c.value() == 99);
}

TEST_CASE("add performs k unit increments") {
    CounterRig rig;
    RtmCounter c = rig.make(3, false);
    c.preset(0, rig.led);
    c.add(137, rig.led);
    CHECK(c.value() == 137);
    c.add(0, rig.led);
    CHECK(c.value() == 137);
    Ledger probe;
    c.add(10, probe);
    CHECK(c.value() == 147);
    // 10 unit increments, one of which carries (139 -> 140).
    CHECK(probe.tw_bits == 11);
}

TEST_CASE("msd p bit distinguishes upper and lower half of the msd cycle") {
    CounterRig rig;
    RtmCounter c = rig.make(2, false);
    c.preset(42, rig.led);
    CHECK_FALSE(c.msd_p_bit()); // msd 4 -> first half
    c.preset(72, rig.led);
    CHECK(c.msd_p_bit()); // msd 7 -> second half
}

TEST_CASE("digits on separate tracks do not interfere") {
    CounterRig rig;
    RtmCounter c = rig.make(6, false);
    c.preset(0, rig.led);
    c.add(999999, rig.led);
    CHECK(c.value() == 999999);
    CHECK(c.threshold_hit());
    // The DBC rows outside the shared window are untouched.
    const Geometry g;
    for (std::uint32_t l = 0; l < g.ap_low; ++l) CHECK(rig.dbc->row(l).none());
}
