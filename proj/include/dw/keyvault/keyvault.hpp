#pragma once

// Heir keys over ristretto255. The secret scalar comes from Argon2id over the
// heir's password and the deployment salt; envelopes are ephemeral ECDH into
// AES-256-GCM.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "dw/common/bytes.hpp"
#include "dw/common/crypto.hpp"
#include "dw/common/random.hpp"

namespace dw::keyvault {

class KeyvaultError : public Error {
public:
    using Error::Error;
};

class WeakInput : public KeyvaultError {
public:
    using KeyvaultError::KeyvaultError;
};

class AuthFailure : public KeyvaultError {
public:
    using KeyvaultError::KeyvaultError;
};

inline constexpr std::size_t kMinSaltSize = 16;
inline constexpr std::string_view kEnvelopeMagic = "DWENV001";

using Scalar = std::array<std::uint8_t, 32>;
using Point = std::array<std::uint8_t, 32>;

/// Argon2id cost. Defaults match libsodium's "moderate" profile.
struct KdfParams {
    std::uint64_t opslimit = 3;
    std::size_t memlimit = 256u * 1024 * 1024;

    friend bool operator==(const KdfParams&, const KdfParams&) = default;
};

struct HeirKeypair {
    Scalar sk{};
    Point pk{};

    std::string pk_hex() const { return to_hex(pk); }
};

HeirKeypair derive_keypair(std::string_view password, ByteView salt, const KdfParams& params = {});
Point public_key_of(const Scalar& sk);
Point parse_public_key(std::string_view hex);

struct Envelope {
    Point ephemeral{};
    crypto::AeadNonce nonce{};
    Bytes sealed;

    friend bool operator==(const Envelope&, const Envelope&) = default;
};

Envelope envelope_encrypt(const Point& pk, ByteView blob, RandomSource& rng = system_random());
/// Throws AuthFailure for a wrong key or any modified byte.
Bytes envelope_decrypt(const Scalar& sk, const Envelope& env);

Bytes serialize_envelope(const Envelope& env);
Envelope deserialize_envelope(ByteView data);

/// Per-deployment KDF settings, persisted as JSON:
///   {"kdf": {"algorithm": "argon2id13", "opslimit": 3, "memlimit": 268435456}, "salt": "<hex>"}
struct VaultConfig {
    KdfParams kdf;
    Bytes salt;

    static VaultConfig generate(RandomSource& rng = system_random());
    static VaultConfig from_json(std::string_view text);
    std::string to_json() const;

    static VaultConfig load(const std::string& path);
    void save(const std::string& path) const;
    /// Reads `path`, or generates a fresh config and writes it there.
    static VaultConfig load_or_create(const std::string& path, RandomSource& rng = system_random());
};

} // namespace dw::keyvault
