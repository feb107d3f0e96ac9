#include "rthdc/bitvec.hpp"

#include <bit>

#include "rthdc/errors.hpp"

namespace rthdc {

BitVec::BitVec(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

bool BitVec::get(std::size_t i) const {
    if (i >= nbits_) throw ContractError("BitVec::get: index out of range");
    return (words_[i / 64] >> (i % 64)) & 1u;
}

void BitVec::set(std::size_t i, bool v) {
    if (i >= nbits_) throw ContractError("BitVec::set: index out of range");
    const std::uint64_t m = std::uint64_t(1) << (i % 64);
    if (v)
        words_[i / 64] |= m;
    else
        words_[i / 64] &= ~m;
}

void BitVec::clear() {
    std::fill(words_.begin(), words_.end(), 0);
}

std::size_t BitVec::popcount() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
}

bool BitVec::any() const {
    for (std::uint64_t w : words_)
        if (w) return true;
    return false;
}

static void check_same_size(const BitVec& a, const BitVec& b, const char* what) {
    if (a.size() != b.size()) throw ContractError(std::string(what) + ": size mismatch");
}

BitVec& BitVec::operator^=(const BitVec& o) {
    check_same_size(*this, o, "BitVec::xor");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
    return *this;
}

BitVec& BitVec::operator&=(const BitVec& o) {
    check_same_size(*this, o, "BitVec::and");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
}

BitVec& BitVec::operator|=(const BitVec& o) {
    check_same_size(*this, o, "BitVec::or");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
}

BitVec BitVec::operator~() const {
    BitVec r(nbits_);
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = ~words_[i];
    r.mask_tail();
    return r;
}

bool BitVec::operator==(const BitVec& o) const {
    return nbits_ == o.nbits_ && words_ == o.words_;
}

static void check_chunking(std::size_t nbits, std::size_t chunk_bits, const char* what) {
    if (chunk_bits == 0 || chunk_bits % 64 != 0 || nbits % chunk_bits != 0)
        throw ContractError(std::string(what) + ": chunk width must be a multiple of 64 dividing the size");
}

BitVec BitVec::rotated_left(std::size_t n, std::size_t chunk_bits) const {
    check_chunking(nbits_, chunk_bits, "BitVec::rotated_left");
    n %= chunk_bits;
    BitVec r(nbits_);
    const std::size_t cw = chunk_bits / 64; // words per chunk
    const std::size_t qw = n / 64;          // whole-word part of the rotation
    const unsigned s = unsigned(n % 64);    // bit part
    for (std::size_t c = 0; c < words_.size() / cw; ++c) {
        const std::uint64_t* in = words_.data() + c * cw;
        std::uint64_t* out = r.words_.data() + c * cw;
        for (std::size_t j = 0; j < cw; ++j) {
            // Destination word j collects bits from source words (j-qw) and
            // (j-qw-1), both mod cw, split at bit offset s.
            const std::size_t lo = (j + cw - qw) % cw;
            const std::size_t hi = (j + 2 * cw - qw - 1) % cw;
            out[j] = s == 0 ? in[lo] : (in[lo] << s) | (in[hi] >> (64 - s));
        }
    }
    return r;
}

BitVec BitVec::rotated_right(std::size_t n, std::size_t chunk_bits) const {
    check_chunking(nbits_, chunk_bits, "BitVec::rotated_right");
    n %= chunk_bits;
    return rotated_left((chunk_bits - n) % chunk_bits, chunk_bits);
}

BitVec BitVec::chunk(std::size_t index, std::size_t chunk_bits) const {
    check_chunking(nbits_, chunk_bits, "BitVec::chunk");
    const std::size_t cw = chunk_bits / 64;
    if (index >= words_.size() / cw) throw ContractError("BitVec::chunk: index out of range");
    BitVec r(chunk_bits);
    for (std::size_t j = 0; j < cw; ++j) r.words_[j] = words_[index * cw + j];
    return r;
}

void BitVec::set_chunk(std::size_t index, std::size_t chunk_bits, const BitVec& v) {
    check_chunking(nbits_, chunk_bits, "BitVec::set_chunk");
    const std::size_t cw = chunk_bits / 64;
    if (index >= words_.size() / cw) throw ContractError("BitVec::set_chunk: index out of range");
    if (v.size() != chunk_bits) throw ContractError("BitVec::set_chunk: chunk size mismatch");
    for (std::size_t j = 0; j < cw; ++j) words_[index * cw + j] = v.words_[j];
}

void BitVec::fill_random(std::mt19937_64& gen) {
    for (auto& w : words_) w = gen();
    mask_tail();
}

std::vector<std::uint8_t> BitVec::to_bytes() const {
    std::vector<std::uint8_t> out((nbits_ + 7) / 8, 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint64_t w = words_[i / 8];
        out[i] = std::uint8_t((w >> ((i % 8) * 8)) & 0xffu);
    }
    return out;
}

BitVec BitVec::from_bytes(const std::uint8_t* data, std::size_t nbytes, std::size_t nbits) {
    if (nbytes != (nbits + 7) / 8) throw ContractError("BitVec::from_bytes: byte count mismatch");
    BitVec r(nbits);
    for (std::size_t i = 0; i < nbytes; ++i)
        r.words_[i / 8] |= std::uint64_t(data[i]) << ((i % 8) * 8);
    r.mask_tail();
    return r;
}

std::string BitVec::to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (std::uint8_t b : to_bytes()) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

void BitVec::set_word(std::size_t i, std::uint64_t w) {
    if (i >= words_.size()) throw ContractError("BitVec::set_word: index out of range");
    words_[i] = w;
    if (i + 1 == words_.size()) mask_tail();
}

void BitVec::mask_tail() {
    const std::size_t tail = nbits_ % 64;
    if (tail && !words_.empty()) words_.back() &= (~std::uint64_t(0)) >> (64 - tail);
}

std::size_t hamming(const BitVec& a, const BitVec& b) {
    check_same_size(a, b, "hamming");
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.words().size(); ++i)
        n += std::popcount(a.words()[i] ^ b.words()[i]);
    return n;
}

} // namespace rthdc
