#include "dw/keyvault/keyvault.hpp"

#include <sodium.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace dw::keyvault {

namespace {

constexpr std::string_view kEnvelopeKeyLabel = "dw.keyvault.envelope.v1";

bool is_zero(const Scalar& s)
{
    return sodium_is_zero(s.data(), s.size()) == 1;
}

crypto::AeadKey envelope_key(const Point& eph, const Point& pk, const Point& shared)
{
    crypto::Sha256 h;
    h.update(kEnvelopeKeyLabel).update(eph).update(pk).update(shared);
    return h.finish();
}

Bytes aad_for(const Point& eph)
{
    ByteWriter w;
    w.raw(kEnvelopeMagic);
    w.raw(eph);
    return w.take();
}

} // namespace

HeirKeypair derive_keypair(std::string_view password, ByteView salt, const KdfParams& params)
{
    crypto::ensure_sodium();
    if (password.empty()) throw WeakInput("password must not be empty");
    if (salt.size() < kMinSaltSize) throw WeakInput("salt must be at least 16 bytes");
    if (params.opslimit < crypto_pwhash_OPSLIMIT_MIN || params.memlimit < crypto_pwhash_MEMLIMIT_MIN) {
        throw WeakInput("KDF parameters below the Argon2id minimum");
    }

    // Argon2id salts are fixed at 16 bytes; longer salts are compressed.
    std::array<std::uint8_t, crypto_pwhash_SALTBYTES> salt16{};
    if (salt.size() == salt16.size()) {
        std::copy(salt.begin(), salt.end(), salt16.begin());
    } else {
        crypto_generichash(salt16.data(), salt16.size(), salt.data(), salt.size(), nullptr, 0);
    }

    std::array<std::uint8_t, 64> wide{};
    if (crypto_pwhash(wide.data(), wide.size(), password.data(), password.size(), salt16.data(), params.opslimit,
                      params.memlimit, crypto_pwhash_ALG_ARGON2ID13) != 0) {
        throw KeyvaultError("Argon2id failed (out of memory?)");
    }

    HeirKeypair kp;
    std::array<std::uint8_t, 64> block = wide;
    for (std::uint32_t counter = 1;; ++counter) {
        crypto_core_ristretto255_scalar_reduce(kp.sk.data(), block.data());
        if (!is_zero(kp.sk)) break;
        // Zero scalar: resample from SHA-512(wide || counter).
        std::array<std::uint8_t, 68> in{};
        std::copy(wide.begin(), wide.end(), in.begin());
        for (int i = 0; i < 4; ++i) in[64 + i] = static_cast<std::uint8_t>(counter >> (24 - 8 * i));
        crypto_hash_sha512(block.data(), in.data(), in.size());
    }
    sodium_memzero(wide.data(), wide.size());
    sodium_memzero(block.data(), block.size());
    kp.pk = public_key_of(kp.sk);
    return kp;
}

Point public_key_of(const Scalar& sk)
{
    crypto::ensure_sodium();
    Point pk{};
    if (crypto_scalarmult_ristretto255_base(pk.data(), sk.data()) != 0) throw WeakInput("secret scalar is zero");
    return pk;
}

Point parse_public_key(std::string_view hex)
{
    crypto::ensure_sodium();
    auto b = from_hex(hex);
    if (b.size() != 32) throw KeyvaultError("public key must be 32 bytes");
    Point pk{};
    std::copy(b.begin(), b.end(), pk.begin());
    if (!crypto_core_ristretto255_is_valid_point(pk.data())) throw KeyvaultError("not a valid ristretto255 point");
    return pk;
}

Envelope envelope_encrypt(const Point& pk, ByteView blob, RandomSource& rng)
{
    crypto::ensure_sodium();
    if (blob.empty()) throw WeakInput("nothing to encrypt");
    if (!crypto_core_ristretto255_is_valid_point(pk.data())) throw KeyvaultError("invalid recipient key");

    Scalar eph_sk{};
    Point shared{};
    Envelope env;
    do {
        auto wide = rng.bytes(64);
        crypto_core_ristretto255_scalar_reduce(eph_sk.data(), wide.data());
    } while (is_zero(eph_sk));
    env.ephemeral = public_key_of(eph_sk);
    if (crypto_scalarmult_ristretto255(shared.data(), eph_sk.data(), pk.data()) != 0) {
        throw KeyvaultError("degenerate shared secret");
    }
    sodium_memzero(eph_sk.data(), eph_sk.size());

    auto key = envelope_key(env.ephemeral, pk, shared);
    rng.fill(env.nonce);
    env.sealed = crypto::aead_seal(key, env.nonce, blob, aad_for(env.ephemeral));
    sodium_memzero(key.data(), key.size());
    return env;
}

Bytes envelope_decrypt(const Scalar& sk, const Envelope& env)
{
    crypto::ensure_sodium();
    if (is_zero(sk)) throw AuthFailure("envelope authentication failed");
    Point shared{};
    if (!crypto_core_ristretto255_is_valid_point(env.ephemeral.data()) ||
        crypto_scalarmult_ristretto255(shared.data(), sk.data(), env.ephemeral.data()) != 0) {
        throw AuthFailure("envelope authentication failed");
    }
    auto key = envelope_key(env.ephemeral, public_key_of(sk), shared);
    auto plain = crypto::aead_open(key, env.nonce, env.sealed, aad_for(env.ephemeral));
    sodium_memzero(key.data(), key.size());
    if (!plain) throw AuthFailure("envelope authentication failed");
    return std::move(*plain);
}

// magic | ephemeral (32) | nonce (12) | blob(sealed)
Bytes serialize_envelope(const Envelope& env)
{
    ByteWriter w;
    w.raw(kEnvelopeMagic);
    w.raw(env.ephemeral);
    w.raw(env.nonce);
    w.blob(env.sealed);
    return w.take();
}

Envelope deserialize_envelope(ByteView data)
{
    ByteReader r(data);
    if (to_string(r.raw(kEnvelopeMagic.size())) != kEnvelopeMagic) throw DecodeError("not a DWENV001 envelope");
    Envelope env;
    auto eph = r.raw(32);
    std::copy(eph.begin(), eph.end(), env.ephemeral.begin());
    auto nonce = r.raw(12);
    std::copy(nonce.begin(), nonce.end(), env.nonce.begin());
    env.sealed = r.blob();
    r.expect_done();
    return env;
}

VaultConfig VaultConfig::generate(RandomSource& rng)
{
    VaultConfig c;
    c.salt = rng.bytes(kMinSaltSize);
    return c;
}

VaultConfig VaultConfig::from_json(std::string_view text)
{
    try {
        auto j = nlohmann::json::parse(text);
        VaultConfig c;
        const auto& kdf = j.at("kdf");
        if (kdf.at("algorithm").get<std::string>() != "argon2id13") throw KeyvaultError("unsupported KDF");
        c.kdf.opslimit = kdf.at("opslimit").get<std::uint64_t>();
        c.kdf.memlimit = kdf.at("memlimit").get<std::size_t>();
        c.salt = from_hex(j.at("salt").get<std::string>());
        if (c.salt.size() < kMinSaltSize) throw WeakInput("configured salt is shorter than 16 bytes");
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw KeyvaultError(std::string("bad keyvault config: ") + e.what());
    }
}

std::string VaultConfig::to_json() const
{
    nlohmann::json j;
    j["kdf"] = {{"algorithm", "argon2id13"}, {"opslimit", kdf.opslimit}, {"memlimit", kdf.memlimit}};
    j["salt"] = to_hex(salt);
    return j.dump(2) + "\n";
}

VaultConfig VaultConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw KeyvaultError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void VaultConfig::save(const std::string& path) const
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw KeyvaultError("cannot write " + path);
    out << to_json();
}

VaultConfig VaultConfig::load_or_create(const std::string& path, RandomSource& rng)
{
    if (std::filesystem::exists(path)) return load(path);
    auto c = generate(rng);
    c.save(path);
    return c;
}

} // namespace dw::keyvault
