#include "efid/secure.hpp"

#include <cstring>
#include <stdexcept>

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/params.h>

namespace efid {

namespace {

[[noreturn]] void fail_openssl(const char* what) {
    throw std::runtime_error(std::string("openssl failure in ") + what);
}

// Thread-local reusable HMAC-SHA256 context; EVP_MAC_init re-keys it.
class HmacSha256 {
public:
    HmacSha256() {
        mac_ = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
        if (!mac_)
            fail_openssl("EVP_MAC_fetch");
        ctx_ = EVP_MAC_CTX_new(mac_);
        if (!ctx_)
            fail_openssl("EVP_MAC_CTX_new");
        char digest[] = "SHA256";
        params_[0] = OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest, 0);
        params_[1] = OSSL_PARAM_construct_end();
        // Bind the digest once; later inits pass only the key.
        static const std::uint8_t dummy[16] = {};
        if (EVP_MAC_init(ctx_, dummy, sizeof(dummy), params_) != 1)
            fail_openssl("EVP_MAC_init");
    }

    ~HmacSha256() {
        EVP_MAC_CTX_free(ctx_);
        EVP_MAC_free(mac_);
    }

    std::array<std::uint8_t, 32> digest(std::span<const std::uint8_t, 16> key,
                                        std::span<const std::uint8_t> msg) {
        if (EVP_MAC_init(ctx_, key.data(), key.size(), nullptr) != 1)
            fail_openssl("EVP_MAC_init");
        if (EVP_MAC_update(ctx_, msg.data(), msg.size()) != 1)
            fail_openssl("EVP_MAC_update");
        std::array<std::uint8_t, 32> out{};
        std::size_t outl = 0;
        if (EVP_MAC_final(ctx_, out.data(), &outl, out.size()) != 1 || outl != out.size())
            fail_openssl("EVP_MAC_final");
        return out;
    }

    static HmacSha256& instance() {
        thread_local HmacSha256 hmac;
        return hmac;
    }

private:
    EVP_MAC* mac_ = nullptr;
    EVP_MAC_CTX* ctx_ = nullptr;
    OSSL_PARAM params_[2]{};
};

std::array<std::uint8_t, 32> hmac_sha256(const Key128& key, std::span<const std::uint8_t> msg) {
    return HmacSha256::instance().digest(std::span<const std::uint8_t, 16>(key.bytes), msg);
}

// AES-128 CBC over the whole filter with a zero IV, no padding.
std::vector<std::uint8_t> aes128_cbc(std::span<const std::uint8_t> in, const Key128& key,
                                     bool encrypt) {
    if (in.empty() || in.size() % 16 != 0)
        throw std::invalid_argument(
            "filter width must be a whole number of 128-bit cipher blocks");
    thread_local EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx)
        fail_openssl("EVP_CIPHER_CTX_new");
    static const std::uint8_t zero_iv[16] = {};
    if (EVP_CipherInit_ex(ctx, EVP_aes_128_cbc(), nullptr, key.bytes.data(), zero_iv,
                          encrypt ? 1 : 0) != 1)
        fail_openssl("EVP_CipherInit_ex");
    EVP_CIPHER_CTX_set_padding(ctx, 0);
    std::vector<std::uint8_t> out(in.size());
    int outl = 0;
    if (EVP_CipherUpdate(ctx, out.data(), &outl, in.data(), static_cast<int>(in.size())) != 1)
        fail_openssl("EVP_CipherUpdate");
    int finl = 0;
    if (EVP_CipherFinal_ex(ctx, out.data() + outl, &finl) != 1)
        fail_openssl("EVP_CipherFinal_ex");
    if (static_cast<std::size_t>(outl + finl) != in.size())
        fail_openssl("cipher length");
    return out;
}

std::uint64_t load_be64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v = (v << 8) | p[i];
    return v;
}

void store_be64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) {
        p[7 - i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
}

void store_be32(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
}

std::uint32_t load_be32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
           (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

bool ct_equal64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t diff = a ^ b;
    // Fold without branching on the value.
    diff |= diff >> 32;
    diff |= diff >> 16;
    diff |= diff >> 8;
    diff |= diff >> 4;
    diff |= diff >> 2;
    diff |= diff >> 1;
    return (diff & 1) == 0;
}

void check_tag_bits(std::uint32_t tag_bits) {
    if (tag_bits == 0 || tag_bits > 64 || tag_bits % 8 != 0)
        throw std::invalid_argument("tag width must be 8..64 bits in whole bytes");
}

void reverse_blocks(std::vector<std::uint8_t>& buf) {
    const std::size_t n = buf.size() / 16;
    for (std::size_t i = 0; i < n / 2; ++i)
        for (std::size_t b = 0; b < 16; ++b)
            std::swap(buf[i * 16 + b], buf[(n - 1 - i) * 16 + b]);
}

// Second-pass key so the two chaining directions never share a schedule.
Key128 second_pass_key(const Key128& k1) {
    static const std::uint8_t label[] = {'e', 'n', 'c', '-', 'p', 'a', 's', 's', '2'};
    const auto mac = hmac_sha256(k1, std::span<const std::uint8_t>(label, sizeof(label)));
    Key128 k;
    std::memcpy(k.bytes.data(), mac.data(), k.bytes.size());
    return k;
}

} // namespace

Key128 Key128::from_rng(Rng& rng) {
    Key128 k;
    for (std::size_t i = 0; i < k.bytes.size(); i += 8) {
        const std::uint64_t v = rng.next();
        std::memcpy(k.bytes.data() + i, &v, 8);
    }
    return k;
}

Key128 derive_epoch_key(const Key128& root, std::uint32_t epoch) {
    // label || big-endian epoch number
    std::uint8_t buf[13] = {'t', 'a', 'g', '-', 'e', 'p', 'o', 'c', 'h', 0, 0, 0, 0};
    store_be32(buf + 9, epoch);
    const auto mac = hmac_sha256(root, std::span<const std::uint8_t>(buf, sizeof(buf)));
    Key128 k;
    std::memcpy(k.bytes.data(), mac.data(), k.bytes.size());
    return k;
}

MasterKeys MasterKeys::create(Key128 k1, Key128 k2_root, std::uint32_t epoch) {
    MasterKeys keys;
    keys.k1 = k1;
    keys.k2_root = k2_root;
    keys.epoch = epoch;
    keys.k2 = derive_epoch_key(k2_root, epoch);
    return keys;
}

MasterKeys MasterKeys::from_seed(std::uint64_t seed) {
    Rng rng = Rng::stream(seed, "master-keys");
    Key128 k1 = Key128::from_rng(rng);
    Key128 root = Key128::from_rng(rng);
    return create(k1, root, 0);
}

MasterKeys rotate_key(const MasterKeys& keys) {
    return MasterKeys::create(keys.k1, keys.k2_root, keys.epoch + 1);
}

// Two CBC passes in opposite directions (zero IVs, distinct keys). One pass
// alone leaves ciphertext block i equal whenever the plaintexts agree on
// blocks 1..i, an equality class the correlation probe flags; the reverse
// pass pushes every plaintext bit into every ciphertext block.
EncryptedFid encrypt_fid(const ForwardingId& fid, const Key128& k1) {
    auto buf = aes128_cbc(fid.bits().to_bytes(), k1, true);
    reverse_blocks(buf);
    buf = aes128_cbc(buf, second_pass_key(k1), true);
    reverse_blocks(buf);
    return EncryptedFid{std::move(buf)};
}

ForwardingId decrypt_fid(const EncryptedFid& efid, const Key128& k1) {
    auto buf = efid.bytes;
    reverse_blocks(buf);
    buf = aes128_cbc(buf, second_pass_key(k1), false);
    reverse_blocks(buf);
    buf = aes128_cbc(buf, k1, false);
    return ForwardingId(BitVec::from_bytes(buf));
}

std::uint64_t compute_tag(std::span<const std::uint8_t> efid, const Key128& k2,
                          std::uint32_t tag_bits) {
    check_tag_bits(tag_bits);
    const auto mac = hmac_sha256(k2, efid);
    const std::uint64_t full = load_be64(mac.data());
    return tag_bits == 64 ? full : full >> (64 - tag_bits);
}

Credential issue_credential(const ForwardingId& fid, const MasterKeys& keys,
                            std::uint32_t tag_bits) {
    Credential cred;
    cred.efid = encrypt_fid(fid, keys.k1);
    cred.tag = compute_tag(cred.efid.bytes, keys.k2, tag_bits);
    cred.epoch_hint = keys.epoch;
    return cred;
}

CheckResult security_check(const Credential& cred, const MasterKeys& keys,
                           std::uint32_t tag_bits) {
    check_tag_bits(tag_bits);
    const std::uint64_t expected = compute_tag(cred.efid.bytes, keys.k2, tag_bits);
    if (ct_equal64(expected, cred.tag)) {
        CheckResult res;
        res.verdict = Verdict::Accept;
        res.fid = decrypt_fid(cred.efid, keys.k1);
        return res;
    }
    if (cred.epoch_hint != keys.epoch) {
        const Key128 hinted = derive_epoch_key(keys.k2_root, cred.epoch_hint);
        if (ct_equal64(compute_tag(cred.efid.bytes, hinted, tag_bits), cred.tag))
            return CheckResult{Verdict::StaleEpoch, std::nullopt};
    }
    return CheckResult{Verdict::BadTag, std::nullopt};
}

std::vector<std::uint8_t> encode_credential(const Credential& cred) {
    std::vector<std::uint8_t> wire(cred.efid.bytes.size() + 12);
    std::memcpy(wire.data(), cred.efid.bytes.data(), cred.efid.bytes.size());
    store_be64(wire.data() + cred.efid.bytes.size(), cred.tag);
    store_be32(wire.data() + cred.efid.bytes.size() + 8, cred.epoch_hint);
    return wire;
}

Credential decode_credential(std::span<const std::uint8_t> wire, std::uint32_t m_bits) {
    const std::size_t efid_len = m_bits / 8;
    if (wire.size() != efid_len + 12)
        throw std::invalid_argument("credential wire length mismatch");
    Credential cred;
    cred.efid.bytes.assign(wire.begin(), wire.begin() + static_cast<std::ptrdiff_t>(efid_len));
    cred.tag = load_be64(wire.data() + efid_len);
    cred.epoch_hint = load_be32(wire.data() + efid_len + 8);
    return cred;
}

} // namespace efid
