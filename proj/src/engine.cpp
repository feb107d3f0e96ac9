#include "rthdc/engine.hpp"

#include <algorithm>
#include <numeric>
#include <nlohmann/json.hpp>

#include "rthdc/cim.hpp"
#include "rthdc/errors.hpp"

namespace rthdc::engine {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Encoder window slot i lives at location ap_low + i; the whole window is
// exactly the TRD span between the two ports.
std::uint32_t slot_location(const Geometry& g, std::uint32_t i) { return g.ap_low + i; }

// Search layout: chunk j shares DBC j/2 with its neighbor; even chunks use
// window base 0, odd chunks base trd.
std::uint32_t chunk_dbc(std::uint32_t j) { return j / 2; }
std::uint32_t chunk_base(const Geometry& g, std::uint32_t j) { return (j % 2) * g.trd; }

std::uint64_t pow10(std::uint32_t n) {
    std::uint64_t v = 1;
    while (n--) v *= 10;
    return v;
}

Geometry partition_geometry(const Geometry& g, std::uint32_t subarrays) {
    Geometry p = g;
    p.banks = 1;
    p.subarrays_per_bank = subarrays;
    return p;
}

void require_engine_geometry(const RunConfig& cfg) {
    const Geometry& g = cfg.geometry;
    if (g.tracks_per_dbc != hdc::kChunkBits)
        throw ConfigError("engine mapping requires rows of " +
                          std::to_string(hdc::kChunkBits) + " tracks");
    if (g.trd != 5)
        throw ConfigError("engine mapping requires a TRD of 5 for the base-10 counters");
    if (g.dbcs_per_tile < kCounterDbcBase + kCounterDigits)
        throw ConfigError("engine mapping requires at least 16 DBCs per tile");
    if (g.ap_high + 1 >= g.domains_per_track)
        throw ConfigError("engine mapping needs one location past the lower port "
                          "for item-memory placement");
    const std::uint32_t chunks = cfg.dim / hdc::kChunkBits;
    if (chunks < 1 || chunks > kChunksPerHv)
        throw ConfigError("engine mapping supports dimensions between 512 and 8192");
    const std::uint32_t groups = (chunks + g.trd - 1) / g.trd;
    if ((groups - 1) * g.trd + g.trd > g.domains_per_track)
        throw ConfigError("not enough locations per track for the search result rows");
    if (cfg.ngram > g.trd)
        throw ConfigError("n-gram size exceeds the encoder window (TRD)");
}

} // namespace

// ---------------------------------------------------------------------------
// Item-memory placement

ImPlacement ImPlacement::plan(const std::array<std::uint64_t, hdc::kAlphabetSize>& freq,
                              const Geometry& g) {
    if (g.ap_high + 1 >= g.domains_per_track)
        throw ConfigError("no room for the off-port item-memory row");
    std::array<std::uint8_t, hdc::kAlphabetSize> order{};
    std::iota(order.begin(), order.end(), std::uint8_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::uint8_t a, std::uint8_t b) {
        if (freq[a] != freq[b]) return freq[a] > freq[b];
        return a < b;
    });
    ImPlacement p;
    for (std::uint32_t r = 0; r < hdc::kAlphabetSize; ++r) {
        const std::uint8_t sym = order[r];
        p.rank[sym] = static_cast<std::uint8_t>(r);
        ImSlot slot;
        if (r < 2 * kImDbcCount) {
            slot.dbc = r / 2;
            if (r % 2 == 0) {
                slot.location = g.ap_low;
                slot.port = Port::Upper;
            } else {
                slot.location = g.ap_high;
                slot.port = Port::Lower;
            }
        } else {
            slot.dbc = r - 2 * kImDbcCount;
            slot.location = g.ap_high + 1;
            slot.port = Port::Lower;
        }
        p.slots[sym] = slot;
    }
    return p;
}

ordered_json ImPlacement::to_json() const {
    ordered_json j;
    for (std::uint32_t s = 0; s < hdc::kAlphabetSize; ++s) {
        ordered_json e;
        e["rank"] = rank[s];
        e["dbc"] = slots[s].dbc;
        e["location"] = slots[s].location;
        e["port"] = slots[s].port == Port::Upper ? "upper" : "lower";
        j[std::string(1, hdc::symbol_char(static_cast<hdc::Symbol>(s)))] = std::move(e);
    }
    return j;
}

ImPlacement ImPlacement::from_json(const json& j, const Geometry& g) {
    ImPlacement p;
    std::array<bool, hdc::kAlphabetSize> seen{};
    for (std::uint32_t s = 0; s < hdc::kAlphabetSize; ++s) {
        const std::string key(1, hdc::symbol_char(static_cast<hdc::Symbol>(s)));
        if (!j.contains(key)) throw ConfigError("layout is missing symbol '" + key + "'");
        const json& e = j.at(key);
        p.rank[s] = e.at("rank").get<std::uint8_t>();
        p.slots[s].dbc = e.at("dbc").get<std::uint32_t>();
        p.slots[s].location = e.at("location").get<std::uint32_t>();
        const std::string port = e.at("port").get<std::string>();
        if (port == "upper") p.slots[s].port = Port::Upper;
        else if (port == "lower") p.slots[s].port = Port::Lower;
        else throw ConfigError("layout port must be \"upper\" or \"lower\"");
        if (p.slots[s].dbc >= kImDbcCount || p.slots[s].location >= g.domains_per_track)
            throw ConfigError("layout slot out of range for the configured geometry");
        seen[s] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
        throw ConfigError("layout does not cover the full alphabet");
    return p;
}

// ---------------------------------------------------------------------------
// EngineStats

void EngineStats::merge(const EngineStats& o) {
    im_fetches += o.im_fetches;
    im_fetch_shifts += o.im_fetch_shifts;
    im_fetch_shift_max = std::max(im_fetch_shift_max, o.im_fetch_shift_max);
    if (script_cycles_per_char == 0) {
        script_cycles_per_char = o.script_cycles_per_char;
    } else if (o.script_cycles_per_char != 0 &&
               o.script_cycles_per_char != script_cycles_per_char) {
        throw InternalError("encoder script cost differs between processing groups");
    }
    chars_consumed += o.chars_consumed;
    ngrams_bundled += o.ngrams_bundled;
}

ordered_json EngineStats::to_json() const {
    ordered_json j;
    j["im_fetches"] = im_fetches;
    j["im_fetch_shifts"] = im_fetch_shifts;
    j["im_fetch_shift_max"] = im_fetch_shift_max;
    j["script_cycles_per_char"] = script_cycles_per_char;
    j["chars_consumed"] = chars_consumed;
    j["ngrams_bundled"] = ngrams_bundled;
    return j;
}

// ---------------------------------------------------------------------------
// PgUnit

PgUnit::PgUnit(const RunConfig& cfg, const ImPlacement& placement)
    : cfg_(cfg),
      placement_(placement),
      dev_(partition_geometry(cfg.geometry, cfg.dim / hdc::kChunkBits)),
      cim_tile_(cfg.geometry.tiles_per_subarray - 1) {
    require_engine_geometry(cfg_);
    // The counter DBCs are wired for per-nanowire shift control.
    const std::uint32_t chunks = cfg_.dim / hdc::kChunkBits;
    for (std::uint32_t c = 0; c < chunks; ++c)
        for (std::uint32_t digit = 0; digit < kCounterDigits; ++digit)
            dbc(c, kCounterDbcBase + digit).set_independent(true);
}

Dbc& PgUnit::dbc(std::uint32_t chunk, std::uint32_t d) {
    return dev_.dbc({0, chunk, cim_tile_, d, 0});
}

template <class F>
void PgUnit::lock_step(PhaseCosts& pc, Phase ph, F&& per_chunk) {
    const std::uint32_t chunks = cfg_.dim / hdc::kChunkBits;
    Ledger& led = pc.ledger(ph);
    const std::uint64_t start = led.cycles;
    per_chunk(0u);
    const std::uint64_t delta = led.cycles - start;
    for (std::uint32_t c = 1; c < chunks; ++c) per_chunk(c);
    if (led.cycles - start != delta * chunks)
        throw InternalError("subarray micro-op schedules diverged in lock step");
    pc.add_elapsed(ph, delta);
}

void PgUnit::load_item_memory(const hdc::ItemMemory& im, PhaseCosts& pc) {
    // Write slots in rank order, then re-home every item-memory DBC so the
    // fetch distance invariant holds from the first character on.
    std::array<std::uint8_t, hdc::kAlphabetSize> by_rank{};
    for (std::uint32_t s = 0; s < hdc::kAlphabetSize; ++s) by_rank[placement_.rank[s]] = static_cast<std::uint8_t>(s);
    lock_step(pc, Phase::Io, [&](std::uint32_t chunk) {
        Ledger& led = pc.ledger(Phase::Io);
        for (std::uint8_t sym : by_rank) {
            const ImSlot& slot = placement_.slots[sym];
            Dbc& d = dbc(chunk, slot.dbc);
            d.shift_to(slot.location, slot.port, led);
            d.write_row(slot.port, im.hv(sym).chunk(chunk, hdc::kChunkBits), led);
        }
        for (std::uint32_t di = 0; di < kImDbcCount; ++di)
            dbc(chunk, di).shift_to(cfg_.geometry.ap_low, Port::Upper, led);
        for (std::uint8_t sym : by_rank) {
            const ImSlot& slot = placement_.slots[sym];
            if (dbc(chunk, slot.dbc).row(slot.location) != im.hv(sym).chunk(chunk, hdc::kChunkBits))
                throw InternalError("item-memory readback mismatch");
        }
    });
}

void PgUnit::begin_text(std::uint64_t expected_ngrams, PhaseCosts& pc) {
    const Geometry& g = cfg_.geometry;
    const std::uint64_t capacity = pow10(kCounterDigits) - 1;
    if (expected_ngrams > capacity)
        throw PreconditionError("text produces more n-grams than the bundling "
                                "counters can hold");
    chars_seen_ = 0;
    ngrams_seen_ = 0;
    expected_ngrams_ = expected_ngrams;

    // Clear the encoder window slots the script will use.
    lock_step(pc, Phase::Encode, [&](std::uint32_t chunk) {
        Ledger& led = pc.ledger(Phase::Encode);
        Dbc& enc = dbc(chunk, kEncoderDbc);
        const BitVec zero(g.tracks_per_dbc);
        for (std::uint32_t i = cfg_.ngram; i-- > 0;) {
            enc.shift_to(slot_location(g, i), Port::Upper, led);
            enc.write_row(Port::Upper, zero, led);
        }
    });

    // Preset every counter digit with row-level writes: value 0 for exact
    // summation, capacity minus the majority threshold for preset mode.
    std::uint64_t preset = 0;
    if (cfg_.mode == BundlingMode::PresetThreshold)
        preset = capacity - (expected_ngrams / 2 + 1);
    lock_step(pc, Phase::Bundle, [&](std::uint32_t chunk) {
        Ledger& led = pc.ledger(Phase::Bundle);
        for (std::uint32_t digit = 0; digit < kCounterDigits; ++digit) {
            const auto dv = static_cast<std::uint8_t>((preset / pow10(digit)) % 10);
            const auto window = johnson_window(dv);
            Dbc& d = dbc(chunk, kCounterDbcBase + digit);
            BitVec ones(g.tracks_per_dbc);
            ones = ~ones;
            const BitVec zeros(g.tracks_per_dbc);
            for (std::uint32_t w = 0; w < g.trd; ++w) {
                d.shift_to(g.ap_low + w, Port::Upper, led);
                d.write_row(Port::Upper, window[w] ? ones : zeros, led);
            }
            d.shift_to(g.ap_low, Port::Upper, led);
        }
    });
}

std::optional<BitVec> PgUnit::consume(hdc::Symbol s, PhaseCosts& pc, bool want_ngram) {
    if (s >= hdc::kAlphabetSize) throw PreconditionError("symbol out of range");
    const Geometry& g = cfg_.geometry;
    const std::uint32_t n = cfg_.ngram;
    const std::uint32_t chunks = cfg_.dim / hdc::kChunkBits;
    const ImSlot& slot = placement_.slots[s];
    const bool emit = chars_seen_ + 1 >= n;

    std::vector<BitVec> xor_rows(emit ? chunks : 0);
    std::uint64_t script_cycles = 0;
    std::uint32_t fetch_steps = 0;

    lock_step(pc, Phase::Encode, [&](std::uint32_t chunk) {
        Ledger& led = pc.ledger(Phase::Encode);
        Dbc& enc = dbc(chunk, kEncoderDbc);
        Dbc& imd = dbc(chunk, slot.dbc);
        std::uint64_t sc = 0;
        // Shift-register the window: slot i receives the rotated slot i-1.
        for (std::uint32_t i = n; i-- > 1;) {
            sc += enc.shift_to(slot_location(g, i - 1), Port::Upper, led);
            const BitVec rotated = enc.rotate_read(Port::Upper, RotateDir::Left, led);
            ++sc;
            sc += enc.shift_to(slot_location(g, i), Port::Upper, led);
            enc.write_row(Port::Upper, rotated, led);
            ++sc;
        }
        // Fetch the symbol chunk and drop it into slot 0.
        const std::uint32_t steps = imd.shift_to(slot.location, slot.port, led);
        const BitVec fetched = imd.read_row(slot.port, led);
        sc += enc.shift_to(slot_location(g, 0), Port::Upper, led);
        enc.write_row(Port::Upper, fetched, led);
        ++sc;
        if (emit) {
            xor_rows[chunk] = cimop(enc, slot_location(g, 0), n, CimOpKind::Xor, led);
            ++sc;
        }
        if (chunk == 0) {
            script_cycles = sc;
            fetch_steps = steps;
        }
    });

    stats_.im_fetches += 1;
    stats_.im_fetch_shifts += fetch_steps;
    stats_.im_fetch_shift_max = std::max(stats_.im_fetch_shift_max, fetch_steps);
    stats_.chars_consumed += 1;
    chars_seen_ += 1;

    if (!emit) return std::nullopt;

    // The per-character schedule is fixed, so its cost must be constant for
    // every character that produces an n-gram.
    if (stats_.script_cycles_per_char == 0) stats_.script_cycles_per_char = script_cycles;
    else if (script_cycles != stats_.script_cycles_per_char)
        throw InternalError("encoder script cost varied between characters");

    ngrams_seen_ += 1;
    stats_.ngrams_bundled += 1;
    std::array<BitVec, kChunksPerHv> masks;
    for (std::uint32_t c = 0; c < chunks; ++c) masks[c] = xor_rows[c];
    bundle_increment(masks, pc);

    if (!want_ngram) return std::nullopt;
    BitVec ng(cfg_.dim);
    for (std::uint32_t c = 0; c < chunks; ++c) ng.set_chunk(c, hdc::kChunkBits, xor_rows[c]);
    return ng;
}

void PgUnit::bundle_increment(const std::array<BitVec, kChunksPerHv>& masks, PhaseCosts& pc) {
    const Geometry& g = cfg_.geometry;
    const std::uint32_t chunks = cfg_.dim / hdc::kChunkBits;
    Ledger& led = pc.ledger(Phase::Bundle);

    // Controller-side helpers that inspect the Johnson windows without
    // issuing device events: the wrap mask (digit at 9) and, in preset mode,
    // the saturation mask that freezes counters at capacity.
    auto nines_mask = [&](std::uint32_t chunk, std::uint32_t digit) {
        Dbc& d = dbc(chunk, kCounterDbcBase + digit);
        BitVec m = ~d.window_row(0);
        for (std::uint32_t w = 1; w + 1 < g.trd; ++w) m &= ~d.window_row(w);
        m &= d.window_row(g.trd - 1);
        return m;
    };

    std::vector<BitVec> mask(chunks);
    for (std::uint32_t c = 0; c < chunks; ++c) {
        mask[c] = masks[c];
        if (cfg_.mode == BundlingMode::PresetThreshold) {
            BitVec sat = nines_mask(c, 0);
            for (std::uint32_t digit = 1; digit < kCounterDigits; ++digit)
                sat &= nines_mask(c, digit);
            mask[c] &= ~sat;
        }
    }

    for (std::uint32_t digit = 0; digit < kCounterDigits; ++digit) {
        bool any = false;
        std::vector<BitVec> carry(chunks);
        for (std::uint32_t c = 0; c < chunks; ++c) {
            if (!mask[c].any()) {
                carry[c] = BitVec(g.tracks_per_dbc);
                continue;
            }
            Dbc& d = dbc(c, kCounterDbcBase + digit);
            carry[c] = mask[c] & nines_mask(c, digit);
            const BitVec push = ~d.window_row(g.trd - 1);
            d.tw_masked(mask[c], push, led);
            any = true;
        }
        if (!any) return;
        pc.add_elapsed(Phase::Bundle, 1);
        mask = std::move(carry);
    }
    for (const BitVec& m : mask)
        if (m.any()) throw InternalError("bundling counter overflow");
}

std::array<BitVec, 3> PgUnit::counter_planes(std::uint32_t chunk, std::uint32_t digit,
                                             PhaseCosts& pc, BitVec& p_row) {
    Ledger& led = pc.ledger(Phase::Bundle);
    Dbc& d = dbc(chunk, kCounterDbcBase + digit);
    auto planes = d.tr_planes(led, cfg_.geometry.trd);
    p_row = d.read_row(Port::Lower, led);
    return planes;
}

std::vector<std::uint32_t> PgUnit::read_counts(PhaseCosts& pc) {
    const Geometry& g = cfg_.geometry;
    std::vector<std::uint32_t> counts(cfg_.dim, 0);
    lock_step(pc, Phase::Bundle, [&](std::uint32_t chunk) {
        for (std::uint32_t digit = 0; digit < kCounterDigits; ++digit) {
            BitVec p_row(g.tracks_per_dbc);
            const auto planes = counter_planes(chunk, digit, pc, p_row);
            const std::uint64_t scale = pow10(digit);
            for (std::uint32_t t = 0; t < g.tracks_per_dbc; ++t) {
                const std::uint8_t tr = static_cast<std::uint8_t>(
                    (planes[0].get(t) ? 1 : 0) + (planes[1].get(t) ? 2 : 0) +
                    (planes[2].get(t) ? 4 : 0));
                const std::uint8_t dv = decode_digit(tr, p_row.get(t));
                counts[chunk * hdc::kChunkBits + t] +=
                    static_cast<std::uint32_t>(dv * scale);
            }
        }
    });
    return counts;
}

BitVec PgUnit::read_threshold_hits(PhaseCosts& pc) {
    const Geometry& g = cfg_.geometry;
    BitVec hits(cfg_.dim);
    lock_step(pc, Phase::Bundle, [&](std::uint32_t chunk) {
        // A counter saturated at capacity shows 9 in every digit: TR count 1
        // with the P bit set.
        BitVec hit(g.tracks_per_dbc);
        hit = ~hit;
        for (std::uint32_t digit = 0; digit < kCounterDigits; ++digit) {
            BitVec p_row(g.tracks_per_dbc);
            const auto planes = counter_planes(chunk, digit, pc, p_row);
            hit &= planes[0] & ~planes[1] & ~planes[2] & p_row;
        }
        hits.set_chunk(chunk, hdc::kChunkBits, hit);
    });
    return hits;
}

void PgUnit::store_class_vector(std::uint32_t class_index, const BitVec& hv, PhaseCosts& pc) {
    const Geometry& g = cfg_.geometry;
    if (hv.size() != cfg_.dim) throw PreconditionError("class vector has the wrong dimension");
    std::vector<std::uint32_t> spare;
    for (std::uint32_t loc = 0; loc < g.domains_per_track; ++loc)
        if (loc != g.ap_low && loc != g.ap_high && loc != g.ap_high + 1) spare.push_back(loc);
    const std::uint32_t d = class_index % kImDbcCount;
    const std::uint32_t row = class_index / kImDbcCount;
    if (row >= spare.size())
        throw ConfigError("too many classes for the spare item-memory rows");
    const std::uint32_t loc = spare[row];
    lock_step(pc, Phase::Io, [&](std::uint32_t chunk) {
        Ledger& led = pc.ledger(Phase::Io);
        Dbc& dd = dbc(chunk, d);
        dd.shift_to(loc, Port::Upper, led);
        dd.write_row(Port::Upper, hv.chunk(chunk, hdc::kChunkBits), led);
        dd.shift_to(g.ap_low, Port::Upper, led);
        if (dd.row(loc) != hv.chunk(chunk, hdc::kChunkBits))
            throw InternalError("class-vector readback mismatch");
    });
}

// ---------------------------------------------------------------------------
// SearchUnit

SearchUnit::SearchUnit(const RunConfig& cfg, std::uint32_t num_classes)
    : cfg_(cfg),
      num_classes_(num_classes),
      dev_(partition_geometry(cfg.geometry, num_classes)),
      cim_tile_(cfg.geometry.tiles_per_subarray - 1) {
    require_engine_geometry(cfg_);
    if (num_classes_ == 0) throw PreconditionError("search unit needs at least one class");
    for (std::uint32_t c = 0; c < num_classes_; ++c)
        dbc(c, kSearchCounterDbc).set_independent(true);
}

Dbc& SearchUnit::dbc(std::uint32_t cls, std::uint32_t d) {
    return dev_.dbc({0, cls, cim_tile_, d, 0});
}

void SearchUnit::load_classes(const hdc::AssociativeMemory& am, PhaseCosts& pc) {
    if (am.size() != num_classes_)
        throw PreconditionError("class count does not match the search unit");
    const Geometry& g = cfg_.geometry;
    const std::uint32_t chunks = cfg_.dim / hdc::kChunkBits;
    Ledger& led = pc.ledger(Phase::Io);
    std::uint64_t first_delta = 0;
    const std::uint64_t start = led.cycles;
    for (std::uint32_t c = 0; c < num_classes_; ++c) {
        const std::uint64_t before = led.cycles;
        const BitVec& hv = am.entries[c].hv;
        for (std::uint32_t j = 0; j < chunks; ++j) {
            Dbc& d = dbc(c, chunk_dbc(j));
            d.shift_to(chunk_base(g, j), Port::Upper, led);
            d.write_row(Port::Upper, hv.chunk(j, hdc::kChunkBits), led);
        }
        if (c == 0) first_delta = led.cycles - before;
    }
    if (led.cycles - start != first_delta * num_classes_)
        throw InternalError("class-load schedules diverged");
    pc.add_elapsed(Phase::Io, first_delta);
}

std::vector<std::size_t> SearchUnit::distances(const BitVec& query, PhaseCosts& pc) {
    if (query.size() != cfg_.dim) throw PreconditionError("query has the wrong dimension");
    const Geometry& g = cfg_.geometry;
    const std::uint32_t chunks = cfg_.dim / hdc::kChunkBits;
    const std::uint32_t groups = (chunks + g.trd - 1) / g.trd;
    Ledger& led = pc.ledger(Phase::Search);

    // Query broadcast is serialized over the class subarrays: one bus.
    std::uint64_t t0 = led.cycles;
    for (std::uint32_t c = 0; c < num_classes_; ++c) {
        for (std::uint32_t j = 0; j < chunks; ++j) {
            Dbc& d = dbc(c, chunk_dbc(j));
            d.shift_to(chunk_base(g, j) + 1, Port::Upper, led);
            d.write_row(Port::Upper, query.chunk(j, hdc::kChunkBits), led);
        }
    }
    pc.add_elapsed(Phase::Search, led.cycles - t0);

    // Per-class compute runs in parallel; the slowest class sets the pace
    // because the accumulate step depends on the popcounts.
    std::vector<RtmCounter> counters;
    counters.reserve(num_classes_);
    std::uint64_t max_delta = 0;
    for (std::uint32_t c = 0; c < num_classes_; ++c) {
        const std::uint64_t before = led.cycles;
        std::vector<DigitRef> digits;
        for (std::uint32_t t = 0; t < kSearchCounterDigits; ++t)
            digits.push_back({&dbc(c, kSearchCounterDbc), t});
        counters.emplace_back(std::move(digits), false);
        counters.back().preset(0, led);

        Dbc& res = dbc(c, kSearchResultDbc);
        for (std::uint32_t j = 0; j < chunks; ++j) {
            const BitVec x = cimop(dbc(c, chunk_dbc(j)), chunk_base(g, j), 2,
                                   CimOpKind::Xor, led);
            res.shift_to(j, Port::Upper, led);
            res.write_row(Port::Upper, x, led);
        }
        std::uint64_t expected = 0;
        for (std::uint32_t grp = 0; grp < groups; ++grp) {
            res.shift_to(grp * g.trd, Port::Upper, led);
            const std::vector<std::uint8_t> cnt = res.tr_read(led);
            for (std::uint32_t t = 0; t < g.tracks_per_dbc; ++t) {
                counters.back().add(cnt[t], led);
                expected += cnt[t];
            }
        }
        if (counters.back().value() != expected)
            throw InternalError("distance counter diverged from its increments");
        max_delta = std::max(max_delta, led.cycles - before);
    }
    pc.add_elapsed(Phase::Search, max_delta);

    // Packed readout, serialized back to the controller: per class one TR
    // over the counter window plus the P row, packed 6 bits per digit.
    t0 = led.cycles;
    std::vector<std::size_t> out(num_classes_);
    std::array<std::uint32_t, kSearchCounterDigits> tracks{};
    for (std::uint32_t t = 0; t < kSearchCounterDigits; ++t) tracks[t] = t;
    for (std::uint32_t c = 0; c < num_classes_; ++c) {
        Dbc& d = dbc(c, kSearchCounterDbc);
        const std::vector<std::uint8_t> cnt = d.tr_read(led);
        const BitVec p_row = d.read_row(Port::Lower, led);
        const BitVec packed = pack_counter_row(cnt, p_row, tracks, g.tracks_per_dbc);
        const std::uint64_t dist = decode_packed_row(packed, kSearchCounterDigits);
        if (dist != counters[c].value())
            throw InternalError("packed readout disagrees with the counter value");
        out[c] = static_cast<std::size_t>(dist);
    }
    pc.add_elapsed(Phase::Search, led.cycles - t0);
    return out;
}

// ---------------------------------------------------------------------------
// Packed counter rows

BitVec pack_counter_row(std::span<const std::uint8_t> tr_counts, const BitVec& p_row,
                        std::span<const std::uint32_t> digit_tracks, std::uint32_t row_bits) {
    BitVec row(row_bits);
    for (std::size_t i = 0; i < digit_tracks.size(); ++i) {
        const std::uint32_t t = digit_tracks[i];
        const std::uint8_t cnt = tr_counts[t];
        for (std::uint8_t k = 0; k < 5; ++k)
            if (cnt > k) row.set(6 * i + k, true);
        if (p_row.get(t)) row.set(6 * i + 5, true);
    }
    return row;
}

std::uint64_t decode_packed_row(const BitVec& row, std::uint32_t digits) {
    std::uint64_t value = 0;
    for (std::uint32_t i = 0; i < digits; ++i) {
        std::uint8_t cnt = 0;
        for (std::uint8_t k = 0; k < 5; ++k) {
            const bool flag = row.get(6 * i + k);
            if (flag && cnt != k)
                throw ContractError("state error: packed flags are not unary");
            if (flag) ++cnt;
        }
        const bool p = row.get(6 * i + 5);
        value += static_cast<std::uint64_t>(decode_digit(cnt, p)) * pow10(i);
    }
    return value;
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(const RunConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    require_engine_geometry(cfg_);
    im_ = hdc::ItemMemory::generate(cfg_.seed, cfg_.dim);
}

const ImPlacement& Pipeline::placement() const {
    if (!placement_) throw ContractError("no item-memory layout yet; train or load a model");
    return *placement_;
}

void Pipeline::build_pgs() {
    pgs_.clear();
    for (std::uint32_t p = 0; p < cfg_.num_pgs; ++p)
        pgs_.push_back(std::make_unique<PgUnit>(cfg_, *placement_));
    for (auto& pg : pgs_) pg->load_item_memory(im_, setup_costs_);
}

void Pipeline::build_search(std::uint32_t classes) {
    const Geometry& g = cfg_.geometry;
    const std::uint32_t chunks = cfg_.dim / hdc::kChunkBits;
    const std::uint64_t used = static_cast<std::uint64_t>(cfg_.num_pgs) * chunks + classes;
    if (used > static_cast<std::uint64_t>(g.banks) * g.subarrays_per_bank)
        throw ConfigError("processing groups plus class subarrays exceed the "
                          "configured subarray budget");
    search_ = std::make_unique<SearchUnit>(cfg_, classes);
}

BitVec Pipeline::encode_text(std::span<const hdc::Symbol> text, PhaseCosts& pc,
                             std::uint64_t* ngrams_out) {
    const std::uint32_t n = cfg_.ngram;
    if (text.size() < n)
        throw PreconditionError("text is shorter than the n-gram size");
    if (pgs_.empty()) throw ContractError("processing groups are not initialized");
    const std::uint64_t total = text.size() - n + 1;
    const std::uint32_t p_eff =
        static_cast<std::uint32_t>(std::min<std::uint64_t>(cfg_.num_pgs, total));

    // Each group takes a contiguous run of n-gram start positions; adjacent
    // chunks overlap by n-1 symbols so no window is lost at the seams.
    std::vector<std::vector<std::uint32_t>> counts(p_eff);
    BitVec hits(cfg_.dim);
    PhaseCosts merged;
    for (std::uint32_t p = 0; p < p_eff; ++p) {
        const std::uint64_t s = p * total / p_eff;
        const std::uint64_t e = (p + 1) * total / p_eff;
        const auto span = text.subspan(s, (e - s) + n - 1);
        PhaseCosts ppc;
        pgs_[p]->begin_text(e - s, ppc);
        for (hdc::Symbol sym : span) pgs_[p]->consume(sym, ppc);
        if (pgs_[p]->ngrams_seen() != e - s)
            throw InternalError("processing group bundled an unexpected n-gram count");
        if (cfg_.mode == BundlingMode::ExactSum) counts[p] = pgs_[p]->read_counts(ppc);
        else hits = pgs_[p]->read_threshold_hits(ppc);
        merged.merge_parallel(ppc);
    }
    pc.merge_serial(merged);

    BitVec out(cfg_.dim);
    if (cfg_.mode == BundlingMode::ExactSum) {
        for (std::uint32_t i = 0; i < cfg_.dim; ++i) {
            std::uint64_t c = 0;
            for (std::uint32_t p = 0; p < p_eff; ++p) c += counts[p][i];
            if (c > total / 2) out.set(i, true);
        }
    } else {
        out = hits;
    }

    const BitVec ref = hdc::encode(text, im_, n);
    if (out != ref) throw InternalError("in-memory encoding diverged from the reference");
    if (ngrams_out) *ngrams_out = total;
    return out;
}

TrainOutput Pipeline::train(const corpus::Dataset& ds) {
    if (ds.languages.empty()) throw PreconditionError("dataset has no languages");
    const std::uint32_t classes = static_cast<std::uint32_t>(ds.languages.size());

    std::array<std::uint64_t, hdc::kAlphabetSize> freq{};
    for (const auto& lang : ds.languages) {
        const auto f = corpus::frequencies(lang.train);
        for (std::size_t i = 0; i < f.size(); ++i) freq[i] += f[i];
    }
    placement_ = ImPlacement::plan(freq, cfg_.geometry);

    am_ = hdc::AssociativeMemory{};
    setup_costs_ = PhaseCosts{};
    build_search(classes); // validates the subarray budget before the IM loads
    build_pgs();

    TrainOutput out;
    out.costs.merge_serial(setup_costs_);
    for (const auto& lang : ds.languages) {
        PhaseCosts lang_pc;
        TrainOutput::PerLanguage pl;
        pl.label = lang.label;
        pl.symbols = lang.train.size();
        BitVec hv = encode_text(lang.train, lang_pc, &pl.ngrams);
        am_.add(lang.label, hv);
        pl.report = Report::build(lang_pc, cfg_.energy);
        out.costs.merge_serial(lang_pc);
        out.languages.push_back(std::move(pl));
    }

    PhaseCosts io_pc;
    for (std::uint32_t c = 0; c < classes; ++c)
        pgs_[0]->store_class_vector(c, am_.entries[c].hv, io_pc);
    search_->load_classes(am_, io_pc);
    out.costs.merge_serial(io_pc);

    out.am = am_;
    out.report = Report::build(out.costs, cfg_.energy);
    out.stats = stats();
    return out;
}

void Pipeline::load_model(const model_io::Container& c, const nlohmann::json& sidecar) {
    if (c.dim != cfg_.dim || c.seed != cfg_.seed)
        throw ConfigError("model container does not match the run configuration");
    if (c.entries.empty()) throw ConfigError("model container has no classes");
    if (!sidecar.contains("im_placement"))
        throw ConfigError("layout sidecar is missing the item-memory placement");
    placement_ = ImPlacement::from_json(sidecar.at("im_placement"), cfg_.geometry);
    if (sidecar.contains("labels")) {
        const auto labels = sidecar.at("labels").get<std::vector<std::string>>();
        if (labels.size() != c.entries.size())
            throw ConfigError("layout sidecar labels do not match the model container");
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] != c.entries[i].first)
                throw ConfigError("layout sidecar labels do not match the model container");
    }

    am_ = hdc::AssociativeMemory{};
    for (const auto& [label, hv] : c.entries) am_.add(label, hv);

    setup_costs_ = PhaseCosts{};
    build_search(static_cast<std::uint32_t>(am_.size()));
    build_pgs();
    for (std::uint32_t i = 0; i < am_.size(); ++i)
        pgs_[0]->store_class_vector(i, am_.entries[i].hv, setup_costs_);
    search_->load_classes(am_, setup_costs_);
}

Report Pipeline::setup_report() const { return Report::build(setup_costs_, cfg_.energy); }

ClassifyOutput Pipeline::classify(std::span<const hdc::Symbol> text) {
    if (!has_model()) throw ContractError("classify requires a trained or loaded model");
    ClassifyOutput out;
    PhaseCosts pc;
    out.query = encode_text(text, pc, &out.ngrams);
    const std::vector<std::size_t> dist = search_->distances(out.query, pc);

    const auto ref = hdc::distances(out.query, am_);
    for (std::size_t i = 0; i < dist.size(); ++i)
        if (dist[i] != ref[i].second)
            throw InternalError("in-memory distances diverged from the reference");

    std::size_t best = 0;
    for (std::size_t i = 1; i < dist.size(); ++i)
        if (dist[i] < dist[best]) best = i;
    out.label = am_.entries[best].label;
    if (out.label != hdc::classify(out.query, am_))
        throw InternalError("in-memory classification diverged from the reference");
    out.distances.reserve(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i)
        out.distances.emplace_back(am_.entries[i].label, dist[i]);
    out.costs = pc;
    out.report = Report::build(pc, cfg_.energy);
    out.stats = stats();
    return out;
}

EngineStats Pipeline::stats() const {
    EngineStats s;
    for (const auto& pg : pgs_) s.merge(pg->stats());
    return s;
}

model_io::Container Pipeline::to_container() const {
    if (!has_model()) throw ContractError("no model to serialize");
    model_io::Container c;
    c.dim = cfg_.dim;
    c.seed = cfg_.seed;
    for (std::uint32_t i = 0; i < am_.size(); ++i)
        c.entries.emplace_back(am_.entries[i].label, am_.entries[i].hv);
    return c;
}

ordered_json Pipeline::layout_sidecar() const {
    if (!placement_) throw ContractError("no layout to serialize");
    ordered_json j;
    j["format"] = "rthdc-layout";
    j["version"] = 1;
    j["config"] = cfg_.to_json();
    j["config_hash"] = cfg_.hash();
    j["prng"] = hdc::kPrngName;
    ordered_json labels = ordered_json::array();
    for (std::uint32_t i = 0; i < am_.size(); ++i) labels.push_back(am_.entries[i].label);
    j["labels"] = labels;
    j["im_placement"] = placement_->to_json();
    ordered_json rows;
    std::vector<std::uint32_t> spare;
    const Geometry& g = cfg_.geometry;
    for (std::uint32_t loc = 0; loc < g.domains_per_track; ++loc)
        if (loc != g.ap_low && loc != g.ap_high && loc != g.ap_high + 1) spare.push_back(loc);
    for (std::uint32_t i = 0; i < am_.size(); ++i) {
        ordered_json r;
        r["dbc"] = i % kImDbcCount;
        r["location"] = spare[i / kImDbcCount];
        rows[am_.entries[i].label] = std::move(r);
    }
    j["class_rows"] = rows;
    return j;
}

} // namespace rthdc::engine
