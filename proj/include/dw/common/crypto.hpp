#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "dw/common/bytes.hpp"

// Hashing and authenticated encryption shared by every module.
// SHA-256 comes from libsodium, AES-256-GCM from OpenSSL's EVP interface.
namespace dw::crypto {

using Digest = std::array<std::uint8_t, 32>;
using AeadKey = std::array<std::uint8_t, 32>;
using AeadNonce = std::array<std::uint8_t, 12>;

inline constexpr std::size_t kAeadTagSize = 16;

void ensure_sodium();

Digest sha256(ByteView data);
inline Digest sha256(std::string_view s) { return sha256(as_view(s)); }

class Sha256 {
public:
    Sha256();
    Sha256& update(ByteView data);
    Sha256& update(std::string_view s) { return update(as_view(s)); }
    Digest finish();

private:
    alignas(64) std::array<std::uint8_t, 128> state_{};
};

/// AES-256-GCM. Returns ciphertext || 16-byte tag.
Bytes aead_seal(const AeadKey& key, const AeadNonce& nonce, ByteView plaintext, ByteView aad = {});

/// Returns nullopt when the tag does not verify.
std::optional<Bytes> aead_open(const AeadKey& key, const AeadNonce& nonce, ByteView sealed,
                               ByteView aad = {});

} // namespace dw::crypto
