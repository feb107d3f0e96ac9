#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "rthdc/corpus.hpp"
#include "rthdc/engine.hpp"
#include "rthdc/errors.hpp"
#include "rthdc/hdc.hpp"

using namespace rthdc;
using engine::ImPlacement;
using engine::PgUnit;
using engine::Pipeline;
using engine::SearchUnit;
using hdc::Symbol;

namespace {

RunConfig make_cfg(std::uint32_t dim, std::uint32_t ngram = 4, std::uint32_t pgs = 1,
                   BundlingMode mode = BundlingMode::ExactSum) {
    RunConfig c;
    c.seed = 123;
    c.dim = dim;
    c.ngram = ngram;
    c.num_pgs = pgs;
    c.mode = mode;
    c.validate();
    return c;
}

ImPlacement uniform_placement(const Geometry& g) {
    std::array<std::uint64_t, hdc::kAlphabetSize> freq{};
    freq.fill(1);
    return ImPlacement::plan(freq, g);
}

std::vector<Symbol> random_text(std::mt19937_64& gen, std::size_t len) {
    std::vector<Symbol> t(len);
    for (auto& s : t) s = Symbol(gen() % hdc::kAlphabetSize);
    return t;
}

// A text that touches all 27 symbols at least once.
std::vector<Symbol> all_symbols_text(std::mt19937_64& gen, std::size_t extra) {
    std::vector<Symbol> t;
    for (Symbol s = 0; s < hdc::kAlphabetSize; ++s) t.push_back(s);
    const auto tail = random_text(gen, extra);
    t.insert(t.end(), tail.begin(), tail.end());
    return t;
}

} // namespace

TEST_CASE("placement puts frequent symbols under ports and the rest one away") {
    const Geometry g;
    std::array<std::uint64_t, hdc::kAlphabetSize> freq{};
    freq.fill(1);
    freq[25] = 1000; // most frequent symbol gets rank 0
    const ImPlacement p = ImPlacement::plan(freq, g);
    CHECK(p.rank[25] == 0);
    CHECK(p.slots[25].dbc == 0);
    CHECK(p.slots[25].location == g.ap_low);
    CHECK(p.slots[25].port == Port::Upper);
    int under_port = 0, one_away = 0;
    for (Symbol s = 0; s < hdc::kAlphabetSize; ++s) {
        const auto& slot = p.slots[s];
        if (slot.location == g.ap_low || slot.location == g.ap_high) ++under_port;
        else if (slot.location == g.ap_high + 1) ++one_away;
        CHECK(slot.dbc < engine::kImDbcCount);
    }
    CHECK(under_port == 18);
    CHECK(one_away == 9);
}

TEST_CASE("placement json round-trip") {
    const Geometry g;
    std::array<std::uint64_t, hdc::kAlphabetSize> freq{};
    for (std::size_t i = 0; i < freq.size(); ++i) freq[i] = (i * 37) % 11;
    const ImPlacement p = ImPlacement::plan(freq, g);
    const ImPlacement q = ImPlacement::from_json(p.to_json(), g);
    for (Symbol s = 0; s < hdc::kAlphabetSize; ++s) {
        CHECK(q.rank[s] == p.rank[s]);
        CHECK(q.slots[s].dbc == p.slots[s].dbc);
        CHECK(q.slots[s].location == p.slots[s].location);
        CHECK(q.slots[s].port == p.slots[s].port);
    }
}

TEST_CASE("item-memory load writes every chunk row and verifies readback") {
    const RunConfig cfg = make_cfg(1024);
    PgUnit pg(cfg, uniform_placement(cfg.geometry));
    const auto im = hdc::ItemMemory::generate(cfg.seed, cfg.dim);
    PhaseCosts pc;
    pg.load_item_memory(im, pc);
    const Ledger& io = pc.ledger(Phase::Io);
    CHECK(io.write_bits == 27ull * 2 * 512); // 27 symbols x 2 chunks x 512 bits
    CHECK(io.read_bits == 0);                // readback check is controller-side
    CHECK(pc.elapsed[std::size_t(Phase::Io)] > 0);
    // Every item-memory DBC rests aligned at the upper port afterwards.
    for (std::uint32_t c = 0; c < 2; ++c)
        for (std::uint32_t d = 0; d < engine::kImDbcCount; ++d)
            CHECK(pg.dbc(c, d).location_at(Port::Upper) == cfg.geometry.ap_low);
}

TEST_CASE("encoder emits exactly the reference n-gram vectors") {
    for (const std::uint32_t n : {2u, 4u}) {
        const RunConfig cfg = make_cfg(1024, n);
        PgUnit pg(cfg, uniform_placement(cfg.geometry));
        const auto im = hdc::ItemMemory::generate(cfg.seed, cfg.dim);
        PhaseCosts pc;
        pg.load_item_memory(im, pc);

        std::mt19937_64 gen(50 + n);
        const auto text = random_text(gen, 40);
        pg.begin_text(text.size() - n + 1, pc);
        std::size_t emitted = 0;
        for (std::size_t i = 0; i < text.size(); ++i) {
            const auto got = pg.consume(text[i], pc, true);
            if (i + 1 < n) {
                CHECK_FALSE(got.has_value());
                continue;
            }
            REQUIRE(got.has_value());
            ++emitted;
            const std::span<const Symbol> window(text.data() + i + 1 - n, n);
            CHECK(*got == hdc::bind_ngram(window, im));
        }
        CHECK(emitted == text.size() - n + 1);
        CHECK(pg.ngrams_seen() == emitted);
    }
}

TEST_CASE("window slots hold progressively deeper rotations") {
    const RunConfig cfg = make_cfg(1024);
    PgUnit pg(cfg, uniform_placement(cfg.geometry));
    const auto im = hdc::ItemMemory::generate(cfg.seed, cfg.dim);
    PhaseCosts pc;
    pg.load_item_memory(im, pc);
    const std::vector<Symbol> text = {3, 14, 13, 19}; // d o n t
    pg.begin_text(1, pc);
    for (Symbol s : text) pg.consume(s, pc);
    const Geometry& g = cfg.geometry;
    for (std::uint32_t chunk = 0; chunk < 2; ++chunk) {
        const Dbc& enc = pg.dbc(chunk, engine::kEncoderDbc);
        for (std::uint32_t i = 0; i < 4; ++i) {
            const Symbol s = text[3 - i];
            const BitVec expect = hdc::permute(im.hv(s), i).chunk(chunk, hdc::kChunkBits);
            CHECK(enc.row(g.ap_low + i) == expect);
        }
    }
}

TEST_CASE("per-character script cost is constant and frozen at 18 for n=4") {
    const RunConfig cfg = make_cfg(1024);
    PgUnit pg(cfg, uniform_placement(cfg.geometry));
    const auto im = hdc::ItemMemory::generate(cfg.seed, cfg.dim);
    PhaseCosts pc;
    pg.load_item_memory(im, pc);
    std::mt19937_64 gen(60);
    const auto text = all_symbols_text(gen, 30);
    pg.begin_text(text.size() - 3, pc);
    for (Symbol s : text) pg.consume(s, pc);
    // 3 window moves of (2 shifts + rotate read + shift + write), the slot-0
    // drop (shift + write), and the window XOR: 3*5 + 2 + 1.
    CHECK(pg.stats().script_cycles_per_char == 18);
    CHECK(pg.stats().chars_consumed == text.size());
    CHECK(pg.stats().ngrams_bundled == text.size() - 3);
}

TEST_CASE("every item-memory fetch is at most one shift away") {
    const RunConfig cfg = make_cfg(1024);
    PgUnit pg(cfg, uniform_placement(cfg.geometry));
    const auto im = hdc::ItemMemory::generate(cfg.seed, cfg.dim);
    PhaseCosts pc;
    pg.load_item_memory(im, pc);
    std::mt19937_64 gen(61);
    const auto text = all_symbols_text(gen, 100);
    pg.begin_text(text.size() - 3, pc);
    for (Symbol s : text) pg.consume(s, pc);
    CHECK(pg.stats().im_fetches == text.size());
    CHECK(pg.stats().im_fetch_shift_max <= 1);
}

TEST_CASE("bundling counters accumulate exact per-bit counts") {
    const RunConfig cfg = make_cfg(1024);
    PgUnit pg(cfg, uniform_placement(cfg.geometry));
    const auto im = hdc::ItemMemory::generate(cfg.seed, cfg.dim);
    PhaseCosts pc;
    pg.load_item_memory(im, pc);
    std::mt19937_64 gen(62);
    const auto text = random_text(gen, 120);
    pg.begin_text(text.size() - 3, pc);
    for (Symbol s : text) pg.consume(s, pc);
    const auto counts = pg.read_counts(pc);
    const auto ref = hdc::bundle_counts(text, im, 4);
    REQUIRE(counts.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(counts[i] == ref[i]);
}

TEST_CASE("preset threshold readout equals the strict majority") {
    const RunConfig cfg = make_cfg(1024, 4, 1, BundlingMode::PresetThreshold);
    PgUnit pg(cfg, uniform_placement(cfg.geometry));
    const auto im = hdc::ItemMemory::generate(cfg.seed, cfg.dim);
    PhaseCosts pc;
    pg.load_item_memory(im, pc);
    std::mt19937_64 gen(63);
    for (const std::size_t len : {20ul, 21ul}) { // even and odd n-gram counts
        const auto text = random_text(gen, len);
        const std::uint64_t grams = len - 3;
        pg.begin_text(grams, pc);
        for (Symbol s : text) pg.consume(s, pc);
        const BitVec hits = pg.read_threshold_hits(pc);
        const auto ref = hdc::bundle_counts(text, im, 4);
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(hits.get(i) == (ref[i] > grams / 2));
        CHECK(hits == hdc::encode(text, im, 4));
    }
}

TEST_CASE("begin_text rejects texts beyond the counter capacity") {
    const RunConfig cfg = make_cfg(512);
    PgUnit pg(cfg, uniform_placement(cfg.geometry));
    PhaseCosts pc;
    CHECK_THROWS_AS(pg.begin_text(1000000, pc), PreconditionError);
    pg.begin_text(999999, pc); // capacity itself is fine
}

TEST_CASE("packed counter row encodes digits as unary flags plus P bit") {
    std::vector<std::uint8_t> tr(512, 0);
    BitVec p_row(512);
    // Distance 4083: digits 3, 8, 0, 4 from least significant; digit 8 sits
    // in the second half of the Johnson cycle (TR count 2, P set).
    tr[0] = 3;
    tr[1] = 2;
    p_row.set(1, true);
    tr[2] = 0;
    tr[3] = 4;
    const std::array<std::uint32_t, 4> tracks{0, 1, 2, 3};
    const BitVec row = engine::pack_counter_row(tr, p_row, tracks, 512);
    // Digit 0 at bits 0..5: 1,1,1,0,0 then P=0.
    CHECK(row.get(0));
    CHECK(row.get(1));
    CHECK(row.get(2));
    CHECK_FALSE(row.get(3));
    CHECK_FALSE(row.get(5));
    // Digit 1 at bits 6..11: 1,1,0,0,0 then P=1.
    CHECK(row.get(6));
    CHECK(row.get(7));
    CHECK_FALSE(row.get(8));
    CHECK(row.get(11));
    // Digit 2 is all zero, digit 3 is 1,1,1,1,0 P=0.
    CHECK_FALSE(row.get(12));
    CHECK(row.get(18));
    CHECK(row.get(21));
    CHECK_FALSE(row.get(22));
    CHECK(row.popcount() == 3 + 3 + 0 + 4);
    CHECK(engine::decode_packed_row(row, 4) == 4083);

    BitVec bad(512);
    bad.set(1, true); // flag t12 without t01 is not unary
    CHECK_THROWS_AS(engine::decode_packed_row(bad, 4), ContractError);
}

TEST_CASE("search unit reproduces exact hamming distances") {
    for (const std::uint32_t dim : {2048u, 8192u}) {
        const RunConfig cfg = make_cfg(dim);
        hdc::AssociativeMemory am;
        std::mt19937_64 gen(70);
        for (const char* label : {"aa", "bb", "cc", "dd", "ee"}) {
            BitVec hv(dim);
            hv.fill_random(gen);
            am.add(label, hv);
        }
        SearchUnit su(cfg, 5);
        PhaseCosts pc;
        su.load_classes(am, pc);
        for (int rep = 0; rep < 3; ++rep) {
            BitVec q(dim);
            q.fill_random(gen);
            const auto dist = su.distances(q, pc);
            REQUIRE(dist.size() == 5);
            for (std::size_t c = 0; c < 5; ++c)
                CHECK(dist[c] == hamming(q, am.entries[c].hv));
        }
        // An identical query has distance zero to its own class.
        const auto self = su.distances(am.entries[2].hv, pc);
        CHECK(self[2] == 0);
    }
}

TEST_CASE("pipeline trains, classifies, and matches the software reference") {
    const RunConfig cfg = make_cfg(1024);
    const auto ds = corpus::synth_corpus(5, 3, 600, 4, 80);
    Pipeline pipe(cfg);
    const auto out = pipe.train(ds);
    REQUIRE(out.am.size() == 3);

    // Class vectors are bit-exact against the reference encoder.
    const auto im = hdc::ItemMemory::generate(cfg.seed, cfg.dim);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(out.am.entries[i].label == ds.languages[i].label);
        CHECK(out.am.entries[i].hv == hdc::encode(ds.languages[i].train, im, cfg.ngram));
    }
    CHECK(out.report.total_nj > 0);
    CHECK(out.stats.im_fetch_shift_max <= 1);
    REQUIRE(out.languages.size() == 3);
    CHECK(out.languages[0].ngrams == 600 - 3);

    // Classification agrees with the reference on every test sentence.
    for (const auto& lang : ds.languages) {
        for (const auto& sentence : lang.sentences) {
            const auto res = pipe.classify(sentence);
            const BitVec ref_q = hdc::encode(sentence, im, cfg.ngram);
            CHECK(res.query == ref_q);
            CHECK(res.label == hdc::classify(ref_q, pipe.am()));
            REQUIRE(res.distances.size() == 3);
            for (const auto& [label, d] : res.distances)
                CHECK(d == hamming(ref_q, *pipe.am().find(label)));
            CHECK(res.report.encoder_nj > 0);
            CHECK(res.report.simcheck_nj > 0);
        }
    }
}

TEST_CASE("text partitioning across processing groups is invisible in results") {
    const auto ds = corpus::synth_corpus(9, 2, 400, 2, 60);
    std::vector<hdc::AssociativeMemory> ams;
    for (const std::uint32_t pgs : {1u, 2u, 3u, 4u}) {
        Pipeline pipe(make_cfg(1024, 4, pgs));
        ams.push_back(pipe.train(ds).am);
    }
    for (std::size_t i = 1; i < ams.size(); ++i) {
        REQUIRE(ams[i].size() == ams[0].size());
        for (std::size_t c = 0; c < ams[0].size(); ++c) {
            CHECK(ams[i].entries[c].label == ams[0].entries[c].label);
            CHECK(ams[i].entries[c].hv == ams[0].entries[c].hv);
        }
    }
}

TEST_CASE("preset and exact-sum bundling produce identical class vectors") {
    const auto ds = corpus::synth_corpus(11, 2, 500, 2, 60);
    Pipeline exact(make_cfg(1024, 4, 1, BundlingMode::ExactSum));
    Pipeline preset(make_cfg(1024, 4, 1, BundlingMode::PresetThreshold));
    const auto a = exact.train(ds);
    const auto b = preset.train(ds);
    REQUIRE(a.am.size() == b.am.size());
    for (std::size_t c = 0; c < a.am.size(); ++c)
        CHECK(a.am.entries[c].hv == b.am.entries[c].hv);
}

TEST_CASE("model save and load round-trips classification") {
    const RunConfig cfg = make_cfg(1024);
    const auto ds = corpus::synth_corpus(13, 3, 500, 2, 70);
    Pipeline trainer(cfg);
    trainer.train(ds);
    const auto container = trainer.to_container();
    const auto sidecar = trainer.layout_sidecar();
    CHECK(sidecar.at("format") == "rthdc-layout");
    CHECK(sidecar.at("labels").size() == 3);
    CHECK(sidecar.at("config_hash") == cfg.hash());

    Pipeline loaded(cfg);
    loaded.load_model(container, sidecar);
    CHECK(loaded.setup_report().total_nj > 0);
    for (const auto& lang : ds.languages) {
        const auto want = trainer.classify(lang.sentences[0]);
        const auto got = loaded.classify(lang.sentences[0]);
        CHECK(got.label == want.label);
        CHECK(got.distances == want.distances);
        CHECK(got.query == want.query);
    }

    // A mismatched seed is refused up front.
    RunConfig other = cfg;
    other.seed = 999;
    Pipeline wrong(other);
    CHECK_THROWS_AS(wrong.load_model(container, sidecar), ConfigError);
}

TEST_CASE("classify before any model is an error") {
    Pipeline pipe(make_cfg(512));
    const std::vector<Symbol> text(10, 0);
    CHECK_THROWS_AS(pipe.classify(text), ContractError);
    PhaseCosts pc;
    CHECK_THROWS_AS(pipe.encode_text(text, pc), ContractError);
}

TEST_CASE("too many classes for the subarray budget is a config error") {
    RunConfig cfg = make_cfg(8192);
    cfg.num_pgs = 7; // 7*16 = 112 subarrays for encoding, 128 total
    corpus::Dataset ds = corpus::synth_corpus(3, 17, 60, 1, 20);
    Pipeline pipe(cfg);
    CHECK_THROWS_AS(pipe.train(ds), ConfigError); // needs 112 + 17 > 128
}
