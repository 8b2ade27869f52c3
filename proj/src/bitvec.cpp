#include "efid/bitvec.hpp"

#include <stdexcept>

#include "efid/kernels.hpp"

namespace efid {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

BitVec::BitVec(std::uint32_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {
    if (bits == 0 || bits % 8 != 0)
        throw std::invalid_argument("BitVec width must be a positive multiple of 8 bits");
}

BitVec BitVec::from_bytes(std::span<const std::uint8_t> bytes) {
    BitVec v(static_cast<std::uint32_t>(bytes.size() * 8));
    for (std::size_t j = 0; j < bytes.size(); ++j)
        v.words_[j >> 3] |= std::uint64_t{bytes[j]} << (8 * (j & 7));
    return v;
}

BitVec BitVec::from_hex(std::string_view hex, std::uint32_t bits) {
    BitVec v(bits);
    const std::size_t nbytes = bits / 8;
    if (hex.size() != 2 * nbytes)
        throw std::invalid_argument("hex filter has wrong length: expected " +
                                    std::to_string(2 * nbytes) + " digits, got " +
                                    std::to_string(hex.size()));
    for (std::size_t j = 0; j < nbytes; ++j) {
        int hi = hex_value(hex[2 * j]);
        int lo = hex_value(hex[2 * j + 1]);
        if (hi < 0 || lo < 0)
            throw std::invalid_argument("invalid hex digit in filter");
        v.words_[j >> 3] |= std::uint64_t{(std::uint8_t)((hi << 4) | lo)} << (8 * (j & 7));
    }
    return v;
}

BitVec BitVec::random(std::uint32_t bits, Rng& rng, double rho) {
    if (rho < 0.0 || rho > 1.0)
        throw std::invalid_argument("bit probability out of [0,1]");
    BitVec v(bits);
    if (rho == 0.0)
        return v;
    // Threshold compare keeps one 64-bit draw per bit and stays exact for
    // rho == 1.
    const double scaled = rho * 0x1.0p64;
    const std::uint64_t threshold =
        scaled >= 0x1.0p64 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(scaled);
    for (std::uint32_t i = 0; i < bits; ++i) {
        std::uint64_t draw = rng.next();
        if (draw < threshold || rho == 1.0)
            v.words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    }
    return v;
}

BitVec BitVec::all_ones(std::uint32_t bits) {
    BitVec v(bits);
    for (auto& w : v.words_)
        w = ~std::uint64_t{0};
    v.mask_tail();
    return v;
}

void BitVec::reset() {
    for (auto& w : words_)
        w = 0;
}

void BitVec::check_same_width(const BitVec& other) const {
    if (bits_ != other.bits_)
        throw std::invalid_argument("filter width mismatch: " + std::to_string(bits_) +
                                    " vs " + std::to_string(other.bits_));
}

void BitVec::mask_tail() {
    const std::uint32_t rem = bits_ & 63;
    if (rem != 0)
        words_.back() &= (std::uint64_t{1} << rem) - 1;
}

void BitVec::or_with(const BitVec& other) {
    check_same_width(other);
    kernels::active().or_accum(words_.data(), other.words_.data(), words_.size());
}

bool BitVec::is_subset_of(const BitVec& super) const {
    check_same_width(super);
    return kernels::active().is_subset(words_.data(), super.words_.data(), words_.size());
}

std::uint64_t BitVec::popcount() const {
    return kernels::active().popcount(words_.data(), words_.size());
}

bool BitVec::operator==(const BitVec& other) const {
    return bits_ == other.bits_ &&
           kernels::active().equal(words_.data(), other.words_.data(), words_.size());
}

std::vector<std::uint8_t> BitVec::to_bytes() const {
    std::vector<std::uint8_t> out(bits_ / 8);
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = static_cast<std::uint8_t>(words_[j >> 3] >> (8 * (j & 7)));
    return out;
}

std::string BitVec::to_hex() const {
    std::string out;
    out.reserve(bits_ / 4);
    for (std::size_t j = 0; j < bits_ / 8u; ++j) {
        const auto byte = static_cast<std::uint8_t>(words_[j >> 3] >> (8 * (j & 7)));
        out.push_back(kHexDigits[byte >> 4]);
        out.push_back(kHexDigits[byte & 0x0f]);
    }
    return out;
}

} // namespace efid
