/*
 * Bloom-filter source-route core.
 *
 * A LinkId names one unidirectional edge with exactly k set bits out of m;
 * a ForwardingId is the OR of a path's LinkIds and is carried in packet
 * headers. Forwarding nodes test each outgoing edge's LinkId for membership,
 * so a filter at fill factor rho passes an unrelated edge with probability
 * rho^k per check, rho^(k*l) over l hops.
 */
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "efid/bitvec.hpp"
#include "efid/rng.hpp"

namespace efid {

struct FilterParams {
    std::uint32_t m;     // filter width in bits, a whole number of bytes
    std::uint32_t k;     // set bits per LinkId
    double rho_max;      // maximum allowed fill factor, in (0,1]

    FilterParams(std::uint32_t m_, std::uint32_t k_, double rho_max_)
        : m(m_), k(k_), rho_max(rho_max_) {
        if (m == 0 || m % 8 != 0)
            throw std::invalid_argument("m must be a positive multiple of 8");
        if (k == 0 || k > m)
            throw std::invalid_argument("k must satisfy 0 < k <= m");
        if (!(rho_max > 0.0) || rho_max > 1.0)
            throw std::invalid_argument("rho_max must lie in (0,1]");
    }

    bool operator==(const FilterParams&) const = default;
};

class LinkId {
public:
    LinkId(BitVec bits, const FilterParams& params);

    const BitVec& bits() const { return bits_; }
    std::uint32_t width() const { return bits_.bits(); }

    bool operator==(const LinkId& other) const { return bits_ == other.bits_; }

private:
    BitVec bits_;
};

class ForwardingId {
public:
    explicit ForwardingId(BitVec bits) : bits_(std::move(bits)) {}

    const BitVec& bits() const { return bits_; }
    BitVec& bits() { return bits_; }
    std::uint32_t width() const { return bits_.bits(); }

    bool operator==(const ForwardingId& other) const { return bits_ == other.bits_; }

private:
    BitVec bits_;
};

// Raised when the OR of a path's LinkIds exceeds rho_max: the path is not
// encodable and must be rejected or shortened.
class FillFactorExceeded : public std::runtime_error {
public:
    FillFactorExceeded(double actual, double limit);
    double actual;
    double limit;
};

// k distinct positions drawn uniformly from the seeded generator.
LinkId new_link_id(const FilterParams& params, Rng& rng);

// Bitwise OR of the given LinkIds; throws FillFactorExceeded when the result
// is fuller than params.rho_max.
ForwardingId build_fid(std::span<const LinkId> lids, const FilterParams& params);

// True iff every set bit of lid is set in fid.
bool membership_check(const ForwardingId& fid, const LinkId& lid);

// Fraction of set bits, in [0,1].
double fill_factor(const ForwardingId& fid);

// rho_m^(k*l): probability that a filter at fill rho_m passes k-bit
// membership checks over l consecutive hops.
double false_positive_prob(double rho_m, std::uint32_t k, std::uint32_t l);

// Expected fill factor of the OR of n_lids random k-bit LinkIds in an m-bit
// filter: 1 - (1 - 1/m)^(k*n_lids).
double expected_fill(std::uint32_t m, std::uint32_t k, std::uint32_t n_lids);

} // namespace efid
