/*
 * Network-attachment credentials.
 *
 * The topology manager's forwarding identifier never reaches the publisher
 * in the clear: the attachment node encrypts it (AES-128 in a two-pass CBC
 * arrangement with zero IVs, so issuance is deterministic, the credential
 * needs no IV field, and every ciphertext bit depends on every filter bit)
 * and binds a 64-bit keyed tag to the ciphertext. Ingress verification is
 * stateless: recompute the tag under the current epoch key, compare in
 * constant time, and only then decrypt.
 *
 * k1 encrypts and never rotates; the tag key is re-derived from a 128-bit
 * root for every epoch, which is what invalidates replayed credentials.
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "efid/filter.hpp"

namespace efid {

struct Key128 {
    std::array<std::uint8_t, 16> bytes{};

    static Key128 from_rng(Rng& rng);
    bool operator==(const Key128&) const = default;
};

struct MasterKeys {
    Key128 k1;        // encryption key, fixed for the lifetime of the domain
    Key128 k2_root;   // root of the per-epoch tag keys
    std::uint32_t epoch = 0;
    Key128 k2;        // tag key for `epoch`, derived from k2_root

    static MasterKeys create(Key128 k1, Key128 k2_root, std::uint32_t epoch = 0);
    // Both keys drawn from one seed; convenient for simulations.
    static MasterKeys from_seed(std::uint64_t seed);
};

// Tag key for a given epoch: keyed MAC of the epoch number under the root.
Key128 derive_epoch_key(const Key128& root, std::uint32_t epoch);

// Next epoch: epoch+1, fresh k2, k1 untouched.
MasterKeys rotate_key(const MasterKeys& keys);

struct EncryptedFid {
    std::vector<std::uint8_t> bytes;   // same length as the filter, m/8

    bool operator==(const EncryptedFid&) const = default;
};

struct Credential {
    EncryptedFid efid;
    std::uint64_t tag = 0;         // truncated keyed MAC of efid.bytes
    std::uint32_t epoch_hint = 0;  // epoch whose k2 produced the tag

    bool operator==(const Credential&) const = default;
};

// Deterministic, length-preserving, invertible. The filter width must be a
// whole number of 128-bit cipher blocks.
EncryptedFid encrypt_fid(const ForwardingId& fid, const Key128& k1);
ForwardingId decrypt_fid(const EncryptedFid& efid, const Key128& k1);

// Keyed MAC over the ciphertext, truncated to the most significant
// `tag_bits` bits (64 in the real scheme; 16/32/48 exist so that forging
// statistics are observable in tests).
std::uint64_t compute_tag(std::span<const std::uint8_t> efid, const Key128& k2,
                          std::uint32_t tag_bits = 64);

Credential issue_credential(const ForwardingId& fid, const MasterKeys& keys,
                            std::uint32_t tag_bits = 64);

enum class Verdict { Accept, BadTag, StaleEpoch };

struct CheckResult {
    Verdict verdict = Verdict::BadTag;
    std::optional<ForwardingId> fid;   // present iff verdict == Accept

    bool accepted() const { return verdict == Verdict::Accept; }
};

// Stateless ingress check: recompute the tag under the current epoch key and
// compare in constant time; decrypt only on success. StaleEpoch is reported
// when the tag verifies under the credential's hinted (non-current) epoch —
// still a rejection.
CheckResult security_check(const Credential& cred, const MasterKeys& keys,
                           std::uint32_t tag_bits = 64);

// Wire layout inside the packet header: efid bytes, tag (8 bytes big-endian),
// epoch hint (4 bytes big-endian).
std::vector<std::uint8_t> encode_credential(const Credential& cred);
Credential decode_credential(std::span<const std::uint8_t> wire, std::uint32_t m_bits);

} // namespace efid
