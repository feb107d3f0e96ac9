#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rthdc/bitvec.hpp"

namespace rthdc::hdc {

// Binary spatter-code HDC over a 27-symbol alphabet: the letters a..z plus
// one word separator. This module is the pure-software reference; the
// in-memory pipeline must match it bit for bit.

inline constexpr std::uint32_t kChunkBits = 512;
inline constexpr std::uint32_t kAlphabetSize = 27;
using Symbol = std::uint8_t; // 0..25 letters, 26 separator
inline constexpr Symbol kSeparator = 26;

// The seedable generator whose output sequence is fixed by the language
// standard; its identifier is echoed in reports and model sidecars.
inline constexpr const char* kPrngName = "mt19937_64";

char symbol_char(Symbol s); // 'a'..'z', '_' for the separator
bool symbol_valid(Symbol s);

// 27 seeded random hypervectors, one per symbol, drawn in symbol order from
// a single mt19937_64 stream (one 64-bit draw per word, chunk 0 first).
struct ItemMemory {
    std::uint32_t dim = 0;
    std::uint64_t seed = 0;
    std::vector<BitVec> hvs;

    static ItemMemory generate(std::uint64_t seed, std::uint32_t dim);
    const BitVec& hv(Symbol s) const;
};

// Ordered label -> class-vector store; insertion order is the documented
// tie-break order for classification.
struct AssociativeMemory {
    struct Entry {
        std::string label;
        BitVec hv;
    };
    std::vector<Entry> entries;

    void add(std::string label, BitVec hv); // labels must be unique
    const BitVec* find(const std::string& label) const;
    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
};

// Chunk-wise permutation: every 512-bit chunk rotated left by n
// independently, bit i of a chunk moving to bit (i+n) mod 512.
BitVec permute(const BitVec& hv, std::uint32_t n);

// N-gram binding: permute(hv(first), N-1) xor ... xor permute(hv(last), 0).
BitVec bind_ngram(std::span<const Symbol> window, const ItemMemory& im);

// Per-bit ones count over all |text|-N+1 n-gram vectors.
std::vector<std::uint32_t> bundle_counts(std::span<const Symbol> text, const ItemMemory& im,
                                         std::uint32_t n);

// Majority bundling: bit i set iff its count exceeds floor(|Vz|/2); the
// strict inequality resolves even-count ties to 0.
BitVec encode(std::span<const Symbol> text, const ItemMemory& im, std::uint32_t n);

// Per-class Hamming distances in associative-memory order.
std::vector<std::pair<std::string, std::size_t>> distances(const BitVec& query,
                                                           const AssociativeMemory& am);

// Label of the closest class vector; first minimal entry wins ties.
std::string classify(const BitVec& query, const AssociativeMemory& am);

// One class vector per (label, text) pair via encode, in the given order.
AssociativeMemory train(const std::vector<std::pair<std::string, std::vector<Symbol>>>& corpus,
                        const ItemMemory& im, std::uint32_t n);

} // namespace rthdc::hdc
