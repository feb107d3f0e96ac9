#include "rthdc/selftest.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "rthdc/cim.hpp"
#include "rthdc/config.hpp"
#include "rthdc/corpus.hpp"
#include "rthdc/counter.hpp"
#include "rthdc/engine.hpp"
#include "rthdc/errors.hpp"
#include "rthdc/hdc.hpp"
#include "rthdc/model_io.hpp"

namespace rthdc {

namespace {

struct Harness {
    std::ostream& out;
    int failures = 0;
    int total = 0;

    void check(const std::string& name, const std::function<bool()>& fn) {
        ++total;
        bool ok = false;
        std::string note;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            note = std::string(" (") + e.what() + ")";
        }
        out << (ok ? "[ok]   " : "[FAIL] ") << name << note << "\n";
        if (!ok) ++failures;
    }
};

Dbc make_dbc(const Geometry& g, bool independent) {
    Dbc d(g);
    d.set_independent(independent);
    return d;
}

} // namespace

int run_selftest(bool quick, std::ostream& out) {
    Harness h{out};
    const Geometry g;
    const EnergyParams ep;

    h.check("counter counts 0..999 with exact decimal decode", [&] {
        Dbc d = make_dbc(g, true);
        Ledger led;
        RtmCounter c({{&d, 0}, {&d, 1}, {&d, 2}}, false);
        c.preset(0, led);
        const std::uint64_t limit = quick ? 200 : 1000;
        for (std::uint64_t k = 1; k < limit; ++k) {
            c.increment(led);
            if (c.value() != k) return false;
        }
        return true;
    });

    h.check("preset counter saturates after exactly T increments", [&] {
        const int t_max = quick ? 20 : 99;
        for (int t = 1; t <= t_max; ++t) {
            Dbc d = make_dbc(g, true);
            Ledger led;
            RtmCounter c({{&d, 0}, {&d, 1}}, true);
            c.preset(c.max_value() - std::uint64_t(t), led);
            for (int k = 1; k < t; ++k) {
                c.increment(led);
                if (c.threshold_hit()) return false;
            }
            c.increment(led);
            if (!c.threshold_hit()) return false;
            c.increment(led); // must stick at capacity
            if (c.value() != c.max_value()) return false;
        }
        return true;
    });

    h.check("transverse-read logic matches the truth table", [&] {
        for (std::uint32_t pattern = 0; pattern < 32; ++pattern) {
            Dbc d = make_dbc(g, false);
            Ledger led;
            for (std::uint32_t w = 0; w < g.trd; ++w) {
                BitVec row(g.tracks_per_dbc);
                if (pattern & (1u << w)) row = ~row;
                d.shift_to(g.ap_low + w, Port::Upper, led);
                d.write_row(Port::Upper, row, led);
            }
            d.shift_to(g.ap_low, Port::Upper, led);
            for (std::uint32_t size = 1; size <= g.trd; ++size) {
                int ones = 0;
                for (std::uint32_t w = 0; w < size; ++w)
                    if (pattern & (1u << w)) ++ones;
                const bool want_and = ones == int(size);
                const bool want_or = ones > 0;
                const bool want_xor = ones % 2 == 1;
                if (cimop(d, g.ap_low, size, CimOpKind::And, led).get(7) != want_and)
                    return false;
                if (cimop(d, g.ap_low, size, CimOpKind::Or, led).get(7) != want_or)
                    return false;
                if (cimop(d, g.ap_low, size, CimOpKind::Xor, led).get(7) != want_xor)
                    return false;
            }
        }
        return true;
    });

    h.check("rotate-on-read composes to the identity after 512 steps", [&] {
        Dbc d = make_dbc(g, false);
        Ledger led;
        std::mt19937_64 gen(7);
        BitVec row(g.tracks_per_dbc);
        row.fill_random(gen);
        d.shift_to(g.ap_low, Port::Upper, led);
        d.write_row(Port::Upper, row, led);
        for (std::uint32_t i = 0; i < g.tracks_per_dbc; ++i)
            d.write_row(Port::Upper, d.rotate_read(Port::Upper, RotateDir::Left, led), led);
        return d.read_row(Port::Upper, led) == row;
    });

    h.check("energy is linear over ledger merges", [&] {
        Ledger a, b;
        a.record(EventClass::Shift, 1000, 3);
        a.record(EventClass::Read, 512, 1);
        b.record(EventClass::TrWrite, 77, 7);
        b.record(EventClass::Write, 512, 1);
        const double lhs = energy_nj(a + b, ep);
        const double rhs = energy_nj(a, ep) + energy_nj(b, ep);
        if (std::abs(lhs - rhs) > 1e-12) return false;
        Ledger shifts;
        shifts.record(EventClass::Shift, 1000, 0);
        return std::abs(dynamic_energy_nj(shifts, ep) - 0.3) < 1e-12;
    });

    h.check("reference n-gram binding matches a per-bit oracle", [&] {
        const auto im = hdc::ItemMemory::generate(11, 1024);
        const std::vector<hdc::Symbol> win = {3, 14, 13, 19};
        const BitVec got = hdc::bind_ngram(win, im);
        for (std::uint32_t bit = 0; bit < 1024; ++bit) {
            bool want = false;
            for (std::size_t i = 0; i < win.size(); ++i) {
                const std::uint32_t rot = std::uint32_t(win.size() - 1 - i);
                const std::uint32_t chunk = bit / hdc::kChunkBits;
                const std::uint32_t off = bit % hdc::kChunkBits;
                const std::uint32_t src =
                    chunk * hdc::kChunkBits + (off + hdc::kChunkBits - rot % hdc::kChunkBits) % hdc::kChunkBits;
                want ^= im.hv(win[i]).get(src);
            }
            if (got.get(bit) != want) return false;
        }
        return true;
    });

    h.check("small corpus trains and classifies identically in memory", [&] {
        RunConfig cfg;
        cfg.seed = 5;
        const auto ds = corpus::synth_corpus(5, 5, quick ? 800 : 1600, 2, quick ? 120 : 150);
        engine::Pipeline pipe(cfg); // cross-checks device against reference internally
        const auto trained = pipe.train(ds);
        int right = 0, n = 0;
        for (const auto& lang : ds.languages)
            for (const auto& s : lang.sentences) {
                ++n;
                if (pipe.classify(s).label == lang.label) ++right;
            }
        return right == n && trained.am.size() == 5;
    });

    h.check("configuration round-trips through json with a stable hash", [&] {
        RunConfig cfg;
        cfg.seed = 42;
        cfg.num_pgs = 2;
        const auto j = cfg.to_json();
        const RunConfig back = RunConfig::from_json(j);
        return back.to_json() == j && back.hash() == cfg.hash();
    });

    h.check("invalid energy parameters are rejected", [&] {
        EnergyParams bad;
        bad.shift_pj_per_bit = -1.0;
        try {
            bad.validate();
        } catch (const ConfigError&) {
            return true;
        }
        return false;
    });

    h.check("model container round-trips and rejects corruption", [&] {
        model_io::Container c;
        c.dim = 512;
        c.seed = 9;
        std::mt19937_64 gen(9);
        BitVec hv(512);
        hv.fill_random(gen);
        c.entries.emplace_back("lang01", hv);
        std::stringstream buf;
        model_io::write_container(buf, c);
        std::string bytes = buf.str();
        std::stringstream rd(bytes);
        const auto back = model_io::read_container(rd);
        if (back.entries.size() != 1 || !(back.entries[0].second == hv)) return false;
        bytes[0] = 'X'; // break the magic
        std::stringstream bad(bytes);
        try {
            model_io::read_container(bad);
        } catch (const ConfigError&) {
            return true;
        }
        return false;
    });

    out << (h.failures == 0 ? "selftest passed" : "selftest FAILED") << " (" << (h.total - h.failures)
        << "/" << h.total << " checks)\n";
    return h.failures;
}

} // namespace rthdc
