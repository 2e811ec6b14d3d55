#include "dw/common/crypto.hpp"

#include <openssl/evp.h>
#include <sodium.h>

#include <memory>

namespace dw::crypto {

static_assert(sizeof(crypto_hash_sha256_state) <= 128);

void ensure_sodium()
{
    static const int rc = sodium_init();
    if (rc < 0) {
        throw Error("libsodium initialisation failed");
    }
}

Digest sha256(ByteView data)
{
    ensure_sodium();
    Digest out{};
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

Sha256::Sha256()
{
    ensure_sodium();
    crypto_hash_sha256_init(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()));
}

Sha256& Sha256::update(ByteView data)
{
    crypto_hash_sha256_update(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()),
                              data.data(), data.size());
    return *this;
}

Digest Sha256::finish()
{
    Digest out{};
    crypto_hash_sha256_final(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()),
                             out.data());
    return out;
}

namespace {

struct CtxDeleter {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

CipherCtx make_ctx()
{
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) throw Error("EVP_CIPHER_CTX_new failed");
    return ctx;
}

} // namespace

Bytes aead_seal(const AeadKey& key, const AeadNonce& nonce, ByteView plaintext, ByteView aad)
{
    auto ctx = make_ctx();
    int len = 0;
    Bytes out(plaintext.size() + kAeadTagSize);
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()),
                            nullptr) != 1 ||
        EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()) != 1) {
        throw Error("AES-GCM init failed");
    }
    if (!aad.empty() &&
        EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
        throw Error("AES-GCM aad failed");
    }
    int produced = 0;
    if (!plaintext.empty()) {
        if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                              static_cast<int>(plaintext.size())) != 1) {
            throw Error("AES-GCM encrypt failed");
        }
        produced = len;
    }
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + produced, &len) != 1) {
        throw Error("AES-GCM final failed");
    }
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagSize,
                            out.data() + plaintext.size()) != 1) {
        throw Error("AES-GCM tag failed");
    }
    return out;
}

std::optional<Bytes> aead_open(const AeadKey& key, const AeadNonce& nonce, ByteView sealed,
                               ByteView aad)
{
    if (sealed.size() < kAeadTagSize) return std::nullopt;
    const std::size_t n = sealed.size() - kAeadTagSize;
    auto ctx = make_ctx();
    int len = 0;
    Bytes out(n);
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()),
                            nullptr) != 1 ||
        EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()) != 1) {
        throw Error("AES-GCM init failed");
    }
    if (!aad.empty() &&
        EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
        return std::nullopt;
    }
    int produced = 0;
    if (n > 0) {
        if (EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data(), static_cast<int>(n)) != 1) {
            return std::nullopt;
        }
        produced = len;
    }
    Bytes tag(sealed.begin() + static_cast<std::ptrdiff_t>(n), sealed.end());
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagSize, tag.data()) != 1) {
        return std::nullopt;
    }
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + produced, &len) != 1) {
        sodium_memzero(out.data(), out.size());
        return std::nullopt;
    }
    return out;
}

} // namespace dw::crypto
