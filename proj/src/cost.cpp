#include "rthdc/cost.hpp"

#include <nlohmann/json.hpp>

#include "rthdc/errors.hpp"

namespace rthdc {

void EnergyParams::validate() const {
    auto pos = [](double v, const char* name) {
        if (!(v > 0)) throw ConfigError(std::string("energy parameter must be positive: ") + name);
    };
    pos(read_pj_per_bit, "read_pj_per_bit");
    pos(write_pj_per_bit, "write_pj_per_bit");
    pos(shift_pj_per_bit, "shift_pj_per_bit");
    pos(tr_pj_per_bit, "tr_pj_per_bit");
    pos(tw_pj_per_bit, "tw_pj_per_bit");
    pos(background_mw, "background_mw");
    pos(clock_hz, "clock_hz");
}

nlohmann::ordered_json EnergyParams::to_json() const {
    return nlohmann::ordered_json{
        {"read_pj_per_bit", read_pj_per_bit},   {"write_pj_per_bit", write_pj_per_bit},
        {"shift_pj_per_bit", shift_pj_per_bit}, {"tr_pj_per_bit", tr_pj_per_bit},
        {"tw_pj_per_bit", tw_pj_per_bit},       {"background_mw", background_mw},
        {"clock_hz", clock_hz},
    };
}

EnergyParams EnergyParams::from_json(const nlohmann::json& j) {
    EnergyParams p;
    if (!j.is_object()) throw ConfigError("energy section must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (!it.value().is_number()) throw ConfigError("energy parameter must be a number: " + k);
        const double v = it.value().get<double>();
        if (k == "read_pj_per_bit")
            p.read_pj_per_bit = v;
        else if (k == "write_pj_per_bit")
            p.write_pj_per_bit = v;
        else if (k == "shift_pj_per_bit")
            p.shift_pj_per_bit = v;
        else if (k == "tr_pj_per_bit")
            p.tr_pj_per_bit = v;
        else if (k == "tw_pj_per_bit")
            p.tw_pj_per_bit = v;
        else if (k == "background_mw")
            p.background_mw = v;
        else if (k == "clock_hz")
            p.clock_hz = v;
        else
            throw ConfigError("unknown energy parameter: " + k);
    }
    p.validate();
    return p;
}

void Ledger::record(EventClass ev, std::uint64_t bits, std::uint64_t busy_cycles) {
    switch (ev) {
    case EventClass::Shift: shift_bits += bits; break;
    case EventClass::Read: read_bits += bits; break;
    case EventClass::Write: write_bits += bits; break;
    case EventClass::TrRead: tr_bits += bits; break;
    case EventClass::TrWrite: tw_bits += bits; break;
    }
    cycles += busy_cycles;
}

Ledger& Ledger::operator+=(const Ledger& o) {
    shift_bits += o.shift_bits;
    read_bits += o.read_bits;
    write_bits += o.write_bits;
    tr_bits += o.tr_bits;
    tw_bits += o.tw_bits;
    cycles += o.cycles;
    return *this;
}

nlohmann::ordered_json Ledger::to_json() const {
    return nlohmann::ordered_json{
        {"shift_bits", shift_bits}, {"read_bits", read_bits}, {"write_bits", write_bits},
        {"tr_bits", tr_bits},       {"tw_bits", tw_bits},     {"busy_cycles", cycles},
    };
}

double dynamic_energy_nj(const Ledger& l, const EnergyParams& p) {
    const double pj = double(l.read_bits) * p.read_pj_per_bit +
                      double(l.write_bits) * p.write_pj_per_bit +
                      double(l.shift_bits) * p.shift_pj_per_bit +
                      double(l.tr_bits) * p.tr_pj_per_bit +
                      double(l.tw_bits) * p.tw_pj_per_bit;
    return pj / 1000.0;
}

double background_energy_nj(std::uint64_t cycles, const EnergyParams& p) {
    // mW * s = mJ; 1 mJ = 1e6 nJ.
    return p.background_mw * (double(cycles) / p.clock_hz) * 1.0e6;
}

double energy_nj(const Ledger& l, const EnergyParams& p) {
    return dynamic_energy_nj(l, p) + background_energy_nj(l.cycles, p);
}

double latency_ns(std::uint64_t cycles, const EnergyParams& p) {
    return double(cycles) / p.clock_hz * 1.0e9;
}

const char* phase_name(Phase p) {
    switch (p) {
    case Phase::Encode: return "encode";
    case Phase::Bundle: return "bundle";
    case Phase::Search: return "search";
    case Phase::Io: return "io";
    }
    return "?";
}

Ledger PhaseCosts::total_ledger() const {
    Ledger t;
    for (const auto& l : ledgers) t += l;
    return t;
}

std::uint64_t PhaseCosts::total_elapsed() const {
    std::uint64_t t = 0;
    for (auto e : elapsed) t += e;
    return t;
}

void PhaseCosts::merge_serial(const PhaseCosts& o) {
    for (std::size_t i = 0; i < kPhaseCount; ++i) {
        ledgers[i] += o.ledgers[i];
        elapsed[i] += o.elapsed[i];
    }
}

void PhaseCosts::merge_parallel(const PhaseCosts& o) {
    for (std::size_t i = 0; i < kPhaseCount; ++i) {
        ledgers[i] += o.ledgers[i];
        elapsed[i] = std::max(elapsed[i], o.elapsed[i]);
    }
}

Report Report::build(const PhaseCosts& costs, const EnergyParams& p) {
    Report r;
    r.params = p;
    r.events = costs.total_ledger();
    r.cycles = costs.total_elapsed();
    r.runtime_ns = latency_ns(r.cycles, p);
    r.dynamic_nj = dynamic_energy_nj(r.events, p);
    r.background_nj = background_energy_nj(r.cycles, p);
    r.phase_elapsed = costs.elapsed;
    for (std::size_t i = 0; i < kPhaseCount; ++i) {
        double nj = dynamic_energy_nj(costs.ledgers[i], p);
        if (r.cycles > 0)
            nj += r.background_nj * (double(costs.elapsed[i]) / double(r.cycles));
        r.phase_nj[i] = nj;
    }
    r.encoder_nj = r.phase_nj[std::size_t(Phase::Encode)] + r.phase_nj[std::size_t(Phase::Bundle)];
    r.simcheck_nj = r.phase_nj[std::size_t(Phase::Search)];
    r.io_nj = r.phase_nj[std::size_t(Phase::Io)];
    r.total_nj = r.dynamic_nj + r.background_nj;
    return r;
}

nlohmann::ordered_json Report::to_json() const {
    nlohmann::ordered_json phases;
    for (std::size_t i = 0; i < kPhaseCount; ++i) {
        phases[phase_name(Phase(i))] = {
            {"nj", phase_nj[i]},
            {"elapsed_cycles", phase_elapsed[i]},
        };
    }
    nlohmann::ordered_json j{
        {"encoder_nj", encoder_nj},
        {"simcheck_nj", simcheck_nj},
        {"io_nj", io_nj},
        {"total_nj", total_nj},
        {"dynamic_nj", dynamic_nj},
        {"background_nj", background_nj},
        {"cycles", cycles},
        {"runtime_ns", runtime_ns},
        {"phases", phases},
        {"events", events.to_json()},
        {"params_echo", params.to_json()},
    };
    j["params_echo"]["prng"] = "mt19937_64";
    return j;
}

} // namespace rthdc
