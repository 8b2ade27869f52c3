/*
 * Fixed-width bit vector backing link and forwarding identifiers.
 *
 * Bit i lives in bit (i mod 8) of byte floor(i/8); bytes serialize in index
 * order, hex is lowercase with 2*width/8 digits. Width is a whole number of
 * bytes. Values are immutable in spirit: operations that combine filters
 * return new values or accumulate into an explicit destination.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "efid/rng.hpp"

namespace efid {

class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::uint32_t bits);

    static BitVec from_hex(std::string_view hex, std::uint32_t bits);
    static BitVec from_bytes(std::span<const std::uint8_t> bytes);
    // Each bit set independently with probability rho.
    static BitVec random(std::uint32_t bits, Rng& rng, double rho);
    static BitVec all_ones(std::uint32_t bits);

    std::uint32_t bits() const { return bits_; }
    std::size_t word_count() const { return words_.size(); }
    const std::uint64_t* words() const { return words_.data(); }
    std::uint64_t* words() { return words_.data(); }

    bool get(std::uint32_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(std::uint32_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void clear(std::uint32_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    void flip(std::uint32_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }
    void reset();

    void or_with(const BitVec& other);
    bool is_subset_of(const BitVec& super) const;
    std::uint64_t popcount() const;

    std::string to_hex() const;
    std::vector<std::uint8_t> to_bytes() const;

    bool operator==(const BitVec& other) const;

private:
    void check_same_width(const BitVec& other) const;
    void mask_tail();

    std::uint32_t bits_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace efid
