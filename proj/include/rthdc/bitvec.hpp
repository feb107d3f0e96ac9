#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace rthdc {

// Fixed-width bit vector backed by 64-bit words. Bit i lives in word i/64 at
// bit position i%64, i.e. little-endian bit order. This is also the byte
// serialization order used by the model container (bit i -> byte i/8, bit
// i%8 within the byte).
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::size_t nbits);

    std::size_t size() const { return nbits_; }
    std::size_t word_count() const { return words_.size(); }
    bool empty() const { return nbits_ == 0; }

    bool get(std::size_t i) const;
    void set(std::size_t i, bool v);
    void clear(); // zero all bits, keep size

    std::size_t popcount() const;
    bool any() const;
    bool none() const { return !any(); }

    BitVec& operator^=(const BitVec& o);
    BitVec& operator&=(const BitVec& o);
    BitVec& operator|=(const BitVec& o);
    BitVec operator~() const; // complement, tail bits stay zero
    friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }
    friend BitVec operator&(BitVec a, const BitVec& b) { return a &= b; }
    friend BitVec operator|(BitVec a, const BitVec& b) { return a |= b; }
    bool operator==(const BitVec& o) const;

    // Rotates every chunk_bits-wide chunk independently. "Left" moves bit i
    // to bit (i+n) mod chunk_bits within its chunk. chunk_bits must divide
    // size() and be a multiple of 64.
    BitVec rotated_left(std::size_t n, std::size_t chunk_bits) const;
    BitVec rotated_right(std::size_t n, std::size_t chunk_bits) const;

    // Copies chunk `index` (width chunk_bits) out of / into this vector.
    BitVec chunk(std::size_t index, std::size_t chunk_bits) const;
    void set_chunk(std::size_t index, std::size_t chunk_bits, const BitVec& v);

    // Fills all bits from consecutive engine draws, one u64 per word, tail
    // bits masked off. The draw order is part of the model format.
    void fill_random(std::mt19937_64& gen);

    // Little-endian byte serialization, ceil(size/8) bytes.
    std::vector<std::uint8_t> to_bytes() const;
    static BitVec from_bytes(const std::uint8_t* data, std::size_t nbytes, std::size_t nbits);

    std::string to_hex() const; // two hex digits per byte, byte 0 first

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::uint64_t word(std::size_t i) const { return words_[i]; }
    void set_word(std::size_t i, std::uint64_t w);

private:
    void mask_tail();

    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

// Hamming distance; both vectors must have the same size.
std::size_t hamming(const BitVec& a, const BitVec& b);

} // namespace rthdc
