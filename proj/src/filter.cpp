#include "efid/filter.hpp"

#include <cmath>
#include <string>

namespace efid {

LinkId::LinkId(BitVec bits, const FilterParams& params) : bits_(std::move(bits)) {
    if (bits_.bits() != params.m)
        throw std::invalid_argument("LinkId width does not match params.m");
    if (bits_.popcount() != params.k)
        throw std::invalid_argument("LinkId must have exactly k set bits, got " +
                                    std::to_string(bits_.popcount()));
}

FillFactorExceeded::FillFactorExceeded(double actual_, double limit_)
    : std::runtime_error("fill factor " + std::to_string(actual_) +
                         " exceeds maximum " + std::to_string(limit_)),
      actual(actual_), limit(limit_) {}

LinkId new_link_id(const FilterParams& params, Rng& rng) {
    BitVec bits(params.m);
    std::uint32_t placed = 0;
    while (placed < params.k) {
        const auto pos = static_cast<std::uint32_t>(rng.below(params.m));
        if (!bits.get(pos)) {
            bits.set(pos);
            ++placed;
        }
    }
    return LinkId(std::move(bits), params);
}

ForwardingId build_fid(std::span<const LinkId> lids, const FilterParams& params) {
    if (lids.empty())
        throw std::invalid_argument("build_fid requires at least one LinkId");
    BitVec acc(params.m);
    for (const LinkId& lid : lids) {
        if (lid.width() != params.m)
            throw std::invalid_argument("LinkId width does not match params.m");
        acc.or_with(lid.bits());
    }
    ForwardingId fid(std::move(acc));
    const double rho = fill_factor(fid);
    if (rho > params.rho_max)
        throw FillFactorExceeded(rho, params.rho_max);
    return fid;
}

bool membership_check(const ForwardingId& fid, const LinkId& lid) {
    return lid.bits().is_subset_of(fid.bits());
}

double fill_factor(const ForwardingId& fid) {
    return static_cast<double>(fid.bits().popcount()) / static_cast<double>(fid.width());
}

double false_positive_prob(double rho_m, std::uint32_t k, std::uint32_t l) {
    if (!(rho_m > 0.0) || rho_m > 1.0)
        throw std::invalid_argument("rho_m must lie in (0,1]");
    if (k < 1 || l < 1)
        throw std::invalid_argument("k and l must be at least 1");
    return std::pow(rho_m, static_cast<double>(k) * static_cast<double>(l));
}

double expected_fill(std::uint32_t m, std::uint32_t k, std::uint32_t n_lids) {
    if (m == 0)
        throw std::invalid_argument("m must be positive");
    return 1.0 - std::pow(1.0 - 1.0 / static_cast<double>(m),
                          static_cast<double>(k) * static_cast<double>(n_lids));
}

} // namespace efid
