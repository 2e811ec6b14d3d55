#include <gtest/gtest.h>

#include <filesystem>

#include "dw/keyvault/keyvault.hpp"
#include "dw/pdcpabe/scheme.hpp"

using namespace dw;
using namespace dw::keyvault;

namespace {

const KdfParams kFast{1, 8192};
const Bytes kSalt = from_hex("000102030405060708090a0b0c0d0e0f");

} // namespace

TEST(Derive, Deterministic)
{
    auto a = derive_keypair("correct horse", kSalt, kFast);
    auto b = derive_keypair("correct horse", kSalt, kFast);
    EXPECT_EQ(a.pk, b.pk);
    EXPECT_EQ(a.sk, b.sk);
    EXPECT_EQ(a.pk, public_key_of(a.sk));
}

TEST(Derive, DefaultParamsDeterministic)
{
    auto a = derive_keypair("pw", kSalt);
    EXPECT_EQ(a.pk, derive_keypair("pw", kSalt).pk);
}

TEST(Derive, OneCharacterChangesKey)
{
    EXPECT_NE(derive_keypair("password1", kSalt, kFast).pk, derive_keypair("password2", kSalt, kFast).pk);
}

TEST(Derive, SaltMatters)
{
    auto other = kSalt;
    other[0] ^= 1;
    EXPECT_NE(derive_keypair("pw", kSalt, kFast).pk, derive_keypair("pw", other, kFast).pk);
    Bytes longer = kSalt;
    longer.push_back(9);
    EXPECT_NE(derive_keypair("pw", kSalt, kFast).pk, derive_keypair("pw", longer, kFast).pk);
}

TEST(Derive, WeakInputs)
{
    EXPECT_THROW(derive_keypair("", kSalt, kFast), WeakInput);
    EXPECT_THROW(derive_keypair("pw", Bytes(15, 1), kFast), WeakInput);
    EXPECT_THROW(derive_keypair("pw", kSalt, KdfParams{0, 8192}), WeakInput);
}

TEST(Derive, PublicKeyHexRoundTrip)
{
    auto kp = derive_keypair("pw", kSalt, kFast);
    EXPECT_EQ(parse_public_key(kp.pk_hex()), kp.pk);
    EXPECT_THROW(parse_public_key("00"), KeyvaultError);
    EXPECT_THROW(parse_public_key(std::string(64, 'f')), KeyvaultError);
}

TEST(Envelope, RoundTripUserKey)
{
    SeededRandom rng(11);
    auto [pp, mk] = pdcpabe::setup(128, rng);
    auto uk = pdcpabe::keygen(mk, pp, {"Son", "Family"}, rng);
    auto blob = pdcpabe::serialize(uk);

    auto heir = derive_keypair("heir password", kSalt, kFast);
    auto env = envelope_encrypt(heir.pk, blob, rng);
    auto wire = serialize_envelope(env);
    EXPECT_EQ(to_string(ByteView(wire).subspan(0, 8)), "DWENV001");
    auto back = envelope_decrypt(heir.sk, deserialize_envelope(wire));
    EXPECT_EQ(back, blob);
    auto key = pdcpabe::deserialize_user_key(back);
    EXPECT_EQ(key.attrs, uk.attrs);
}

TEST(Envelope, WrongKeyFails)
{
    auto a = derive_keypair("a", kSalt, kFast);
    auto b = derive_keypair("b", kSalt, kFast);
    auto env = envelope_encrypt(a.pk, as_view("secret"));
    EXPECT_THROW(envelope_decrypt(b.sk, env), AuthFailure);
}

TEST(Envelope, EveryTamperedByteFails)
{
    auto kp = derive_keypair("a", kSalt, kFast);
    auto wire = serialize_envelope(envelope_encrypt(kp.pk, as_view("payload bytes")));
    for (std::size_t i = 8; i < wire.size(); ++i) {
        auto bad = wire;
        bad[i] ^= 0x01;
        bool failed = false;
        try {
            envelope_decrypt(kp.sk, deserialize_envelope(bad));
        } catch (const AuthFailure&) {
            failed = true;
        } catch (const DecodeError&) {
            failed = true;
        }
        EXPECT_TRUE(failed) << "byte " << i;
    }
}

TEST(Envelope, PropertyRoundTripAndTamper)
{
    SeededRandom rng(99);
    for (int i = 0; i < 50; ++i) {
        auto salt = rng.bytes(16 + rng.uniform(16));
        auto pw = to_hex(rng.bytes(1 + rng.uniform(12)));
        auto kp = derive_keypair(pw, salt, kFast);
        EXPECT_EQ(kp.pk, derive_keypair(pw, salt, kFast).pk);
        auto blob = rng.bytes(1 + rng.uniform(300));
        auto env = envelope_encrypt(kp.pk, blob, rng);
        ASSERT_EQ(envelope_decrypt(kp.sk, env), blob);
        auto pos = rng.uniform(env.sealed.size());
        env.sealed[pos] ^= static_cast<std::uint8_t>(1 + rng.uniform(255));
        EXPECT_THROW(envelope_decrypt(kp.sk, env), AuthFailure);
    }
}

TEST(Envelope, EmptyBlobRejected)
{
    auto kp = derive_keypair("a", kSalt, kFast);
    EXPECT_THROW(envelope_encrypt(kp.pk, {}), WeakInput);
}

TEST(Envelope, BadMagic)
{
    auto kp = derive_keypair("a", kSalt, kFast);
    auto wire = serialize_envelope(envelope_encrypt(kp.pk, as_view("x")));
    wire[0] = 'X';
    EXPECT_THROW(deserialize_envelope(wire), DecodeError);
}

TEST(Config, JsonRoundTripAndPersist)
{
    SeededRandom rng(5);
    auto c = VaultConfig::generate(rng);
    EXPECT_EQ(c.salt.size(), 16u);
    auto back = VaultConfig::from_json(c.to_json());
    EXPECT_EQ(back.salt, c.salt);
    EXPECT_EQ(back.kdf, c.kdf);

    auto path = (std::filesystem::temp_directory_path() / "dw_keyvault_test.json").string();
    std::filesystem::remove(path);
    auto first = VaultConfig::load_or_create(path, rng);
    auto second = VaultConfig::load_or_create(path, rng);
    EXPECT_EQ(first.salt, second.salt);
    std::filesystem::remove(path);
}

TEST(Config, RejectsBadInput)
{
    EXPECT_THROW(VaultConfig::from_json("{}"), KeyvaultError);
    EXPECT_THROW(VaultConfig::from_json(R"({"kdf":{"algorithm":"scrypt","opslimit":1,"memlimit":8192},"salt":"00"})"),
                 KeyvaultError);
    EXPECT_THROW(VaultConfig::from_json(R"({"kdf":{"algorithm":"argon2id13","opslimit":1,"memlimit":8192},"salt":"00"})"),
                 WeakInput);
}
