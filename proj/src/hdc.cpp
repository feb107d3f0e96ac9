#include "rthdc/hdc.hpp"

#include <bit>
#include <random>

#include "rthdc/errors.hpp"

namespace rthdc::hdc {

char symbol_char(Symbol s) {
    if (s < 26) return char('a' + s);
    if (s == kSeparator) return '_';
    throw ContractError("symbol_char: unknown symbol");
}

bool symbol_valid(Symbol s) {
    return s < kAlphabetSize;
}

ItemMemory ItemMemory::generate(std::uint64_t seed, std::uint32_t dim) {
    if (dim == 0 || dim % kChunkBits != 0)
        throw ConfigError("item memory dimensionality must be a positive multiple of 512");
    ItemMemory im;
    im.dim = dim;
    im.seed = seed;
    std::mt19937_64 gen(seed);
    im.hvs.reserve(kAlphabetSize);
    for (std::uint32_t s = 0; s < kAlphabetSize; ++s) {
        BitVec hv(dim);
        hv.fill_random(gen);
        im.hvs.push_back(std::move(hv));
    }
    return im;
}

const BitVec& ItemMemory::hv(Symbol s) const {
    if (!symbol_valid(s)) throw ContractError("item memory: unknown symbol");
    return hvs[s];
}

void AssociativeMemory::add(std::string label, BitVec hv) {
    if (find(label)) throw ContractError("associative memory: duplicate label " + label);
    entries.push_back({std::move(label), std::move(hv)});
}

const BitVec* AssociativeMemory::find(const std::string& label) const {
    for (const auto& e : entries)
        if (e.label == label) return &e.hv;
    return nullptr;
}

BitVec permute(const BitVec& hv, std::uint32_t n) {
    return hv.rotated_left(n, kChunkBits);
}

BitVec bind_ngram(std::span<const Symbol> window, const ItemMemory& im) {
    if (window.empty()) throw ContractError("bind_ngram: empty window");
    BitVec acc = im.hv(window[0]);
    for (std::size_t i = 1; i < window.size(); ++i) {
        acc = permute(acc, 1);
        acc ^= im.hv(window[i]);
    }
    return acc;
}

std::vector<std::uint32_t> bundle_counts(std::span<const Symbol> text, const ItemMemory& im,
                                         std::uint32_t n) {
    if (n < 1) throw ContractError("bundle_counts: n-gram size must be at least 1");
    if (text.size() < n) throw PreconditionError("bundle_counts: text shorter than the n-gram size");
    std::vector<std::uint32_t> counts(im.dim, 0);
    // Rolling window: slot i holds the i-times-permuted hypervector of the
    // symbol i positions back, so the xor of all slots is the n-gram vector.
    std::vector<BitVec> window(n);
    for (std::size_t t = 0; t < text.size(); ++t) {
        for (std::size_t i = n; i-- > 1;)
            if (!window[i - 1].empty()) window[i] = permute(window[i - 1], 1);
        window[0] = im.hv(text[t]);
        if (t + 1 < n) continue;
        BitVec g = window[0];
        for (std::size_t i = 1; i < n; ++i) g ^= window[i];
        for (std::size_t w = 0; w < g.word_count(); ++w) {
            std::uint64_t bits = g.word(w);
            while (bits) {
                counts[w * 64 + std::size_t(std::countr_zero(bits))]++;
                bits &= bits - 1;
            }
        }
    }
    return counts;
}

BitVec encode(std::span<const Symbol> text, const ItemMemory& im, std::uint32_t n) {
    const auto counts = bundle_counts(text, im, n);
    const std::uint64_t ngrams = text.size() - n + 1;
    const std::uint64_t threshold = ngrams / 2;
    BitVec out(im.dim);
    for (std::uint32_t i = 0; i < im.dim; ++i)
        if (counts[i] > threshold) out.set(i, true);
    return out;
}

std::vector<std::pair<std::string, std::size_t>> distances(const BitVec& query,
                                                           const AssociativeMemory& am) {
    if (am.empty()) throw ContractError("distances: empty associative memory");
    std::vector<std::pair<std::string, std::size_t>> out;
    out.reserve(am.size());
    for (const auto& e : am.entries) out.emplace_back(e.label, hamming(query, e.hv));
    return out;
}

std::string classify(const BitVec& query, const AssociativeMemory& am) {
    const auto d = distances(query, am);
    std::size_t best = 0;
    for (std::size_t i = 1; i < d.size(); ++i)
        if (d[i].second < d[best].second) best = i;
    return d[best].first;
}

AssociativeMemory train(const std::vector<std::pair<std::string, std::vector<Symbol>>>& corpus,
                        const ItemMemory& im, std::uint32_t n) {
    AssociativeMemory am;
    for (const auto& [label, text] : corpus) am.add(label, encode(text, im, n));
    return am;
}

} // namespace rthdc::hdc
