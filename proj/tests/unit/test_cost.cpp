#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "rthdc/cost.hpp"
#include "rthdc/errors.hpp"

using namespace rthdc;

namespace {

Ledger random_ledger(std::mt19937_64& gen) {
    Ledger l;
    l.shift_bits = gen() % 100000;
    l.read_bits = gen() % 100000;
    l.write_bits = gen() % 100000;
    l.tr_bits = gen() % 100000;
    l.tw_bits = gen() % 100000;
    l.cycles = gen() % 100000;
    return l;
}

// Independent energy oracle: straight dot product with the coefficients.
double oracle_dynamic_nj(const Ledger& l, const EnergyParams& p) {
    const double pj = double(l.shift_bits) * p.shift_pj_per_bit +
                      double(l.read_bits) * p.read_pj_per_bit +
                      double(l.write_bits) * p.write_pj_per_bit +
                      double(l.tr_bits) * p.tr_pj_per_bit +
                      double(l.tw_bits) * p.tw_pj_per_bit;
    return pj / 1000.0;
}

} // namespace

TEST_CASE("ledger record and merge are field-wise sums") {
    Ledger l;
    l.record(EventClass::Shift, 512, 1);
    l.record(EventClass::Read, 512, 1);
    l.record(EventClass::Write, 512, 1);
    l.record(EventClass::TrRead, 512, 1);
    l.record(EventClass::TrWrite, 512, 1);
    CHECK(l.shift_bits == 512);
    CHECK(l.read_bits == 512);
    CHECK(l.write_bits == 512);
    CHECK(l.tr_bits == 512);
    CHECK(l.tw_bits == 512);
    CHECK(l.cycles == 5);

    Ledger m = l + l;
    CHECK(m.shift_bits == 1024);
    CHECK(m.cycles == 10);
}

TEST_CASE("known point values with default coefficients") {
    const EnergyParams p;
    Ledger shifts;
    shifts.record(EventClass::Shift, 1000, 1);
    CHECK(dynamic_energy_nj(shifts, p) == doctest::Approx(0.3));

    Ledger reads;
    reads.record(EventClass::Read, 1000, 1);
    CHECK(dynamic_energy_nj(reads, p) == doctest::Approx(0.5));

    Ledger tws;
    tws.record(EventClass::TrWrite, 1000, 1);
    CHECK(dynamic_energy_nj(tws, p) == doctest::Approx(0.8));

    // 212 mW for 1000 cycles at 1 GHz = 212 mW * 1 us = 212 nJ.
    CHECK(background_energy_nj(1000, p) == doctest::Approx(212.0));
    CHECK(latency_ns(1000, p) == doctest::Approx(1000.0));
}

TEST_CASE("dynamic energy matches the oracle and is linear over merges") {
    std::mt19937_64 gen(7);
    const EnergyParams p;
    for (int i = 0; i < 50; ++i) {
        const Ledger a = random_ledger(gen);
        const Ledger b = random_ledger(gen);
        CHECK(dynamic_energy_nj(a, p) == doctest::Approx(oracle_dynamic_nj(a, p)));
        CHECK(dynamic_energy_nj(a + b, p) ==
              doctest::Approx(dynamic_energy_nj(a, p) + dynamic_energy_nj(b, p)));
        CHECK(energy_nj(a + b, p) == doctest::Approx(energy_nj(a, p) + energy_nj(b, p)));
    }
}

TEST_CASE("phase cost composition") {
    PhaseCosts a;
    a.ledger(Phase::Encode).record(EventClass::Read, 512, 1);
    a.add_elapsed(Phase::Encode, 10);
    a.ledger(Phase::Search).record(EventClass::TrRead, 512, 1);
    a.add_elapsed(Phase::Search, 4);

    PhaseCosts b;
    b.ledger(Phase::Encode).record(EventClass::Read, 512, 1);
    b.add_elapsed(Phase::Encode, 25);

    SUBCASE("serial merge adds elapsed") {
        PhaseCosts s = a;
        s.merge_serial(b);
        CHECK(s.ledger(Phase::Encode).read_bits == 1024);
        CHECK(s.elapsed[std::size_t(Phase::Encode)] == 35);
        CHECK(s.total_elapsed() == 39);
    }
    SUBCASE("parallel merge takes the per-phase max") {
        PhaseCosts par = a;
        par.merge_parallel(b);
        CHECK(par.ledger(Phase::Encode).read_bits == 1024);
        CHECK(par.elapsed[std::size_t(Phase::Encode)] == 25);
        CHECK(par.elapsed[std::size_t(Phase::Search)] == 4);
        CHECK(par.total_elapsed() == 29);
    }
}

TEST_CASE("report attributes background pro rata and phases sum to total") {
    const EnergyParams p;
    PhaseCosts c;
    c.ledger(Phase::Encode).record(EventClass::Read, 2000, 2);
    c.add_elapsed(Phase::Encode, 750);
    c.ledger(Phase::Bundle).record(EventClass::TrWrite, 1000, 1);
    c.add_elapsed(Phase::Bundle, 150);
    c.ledger(Phase::Search).record(EventClass::TrRead, 3000, 3);
    c.add_elapsed(Phase::Search, 100);

    const Report r = Report::build(c, p);
    CHECK(r.cycles == 1000);
    CHECK(r.runtime_ns == doctest::Approx(1000.0));
    CHECK(r.background_nj == doctest::Approx(212.0));
    CHECK(r.dynamic_nj == doctest::Approx(0.5 * 2000 / 1000 + 0.8 * 1000 / 1000 + 0.5 * 3000 / 1000));
    CHECK(r.total_nj == doctest::Approx(r.dynamic_nj + r.background_nj));
    // encoder = Encode + Bundle dynamic + (900/1000) of background
    CHECK(r.encoder_nj == doctest::Approx(1.0 + 0.8 + 212.0 * 0.9));
    CHECK(r.simcheck_nj == doctest::Approx(1.5 + 212.0 * 0.1));
    CHECK(r.io_nj == doctest::Approx(0.0));
    CHECK(r.encoder_nj + r.simcheck_nj + r.io_nj == doctest::Approx(r.total_nj));
    double phase_sum = 0;
    for (double v : r.phase_nj) phase_sum += v;
    CHECK(phase_sum == doctest::Approx(r.total_nj));
    CHECK(r.events.read_bits == 2000);
    CHECK(r.events.cycles == 6); // busy cycles, distinct from elapsed
}

TEST_CASE("energy params validate and round-trip through json") {
    EnergyParams p;
    p.validate(); // defaults are fine

    EnergyParams bad = p;
    bad.shift_pj_per_bit = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = p;
    bad.clock_hz = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    p.tw_pj_per_bit = 1.25;
    p.background_mw = 100.0;
    const auto j = p.to_json();
    const EnergyParams q = EnergyParams::from_json(j);
    CHECK(q.tw_pj_per_bit == doctest::Approx(1.25));
    CHECK(q.background_mw == doctest::Approx(100.0));
    CHECK(q.read_pj_per_bit == doctest::Approx(0.5));

    // Partial override keeps the other defaults.
    const EnergyParams r = EnergyParams::from_json(nlohmann::json{{"shift_pj_per_bit", 0.9}});
    CHECK(r.shift_pj_per_bit == doctest::Approx(0.9));
    CHECK(r.tr_pj_per_bit == doctest::Approx(0.5));
}
