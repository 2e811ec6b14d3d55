#include <gtest/gtest.h>

#include "dw/common/bytes.hpp"
#include "dw/common/clock.hpp"
#include "dw/common/crypto.hpp"
#include "dw/common/random.hpp"

using namespace dw;

TEST(Bytes, HexRoundTrip)
{
    Bytes b{0x00, 0x01, 0xab, 0xff};
    EXPECT_EQ(to_hex(b), "0001abff");
    EXPECT_EQ(from_hex("0001ABff"), b);
    EXPECT_THROW(from_hex("abc"), DecodeError);
    EXPECT_THROW(from_hex("zz"), DecodeError);
}

TEST(Bytes, WriterReader)
{
    ByteWriter w;
    w.u8(7);
    w.u16(0x1234);
    w.u32(0xdeadbeef);
    w.u64(1ull << 40);
    w.str("hello");
    w.blob(Bytes{1, 2, 3});
    auto buf = w.take();
    ByteReader r(buf);
    EXPECT_EQ(r.u8(), 7);
    EXPECT_EQ(r.u16(), 0x1234);
    EXPECT_EQ(r.u32(), 0xdeadbeefu);
    EXPECT_EQ(r.u64(), 1ull << 40);
    EXPECT_EQ(r.str(), "hello");
    EXPECT_EQ(r.blob(), (Bytes{1, 2, 3}));
    EXPECT_TRUE(r.done());
    EXPECT_THROW(r.u8(), DecodeError);
}

TEST(Bytes, TruncatedBlob)
{
    ByteWriter w;
    w.u64(100);
    auto buf = w.take();
    ByteReader r(buf);
    EXPECT_THROW(r.blob(), DecodeError);
}

TEST(Random, SeededIsReproducible)
{
    SeededRandom a(42), b(42), c(43);
    auto x = a.bytes(3000);
    EXPECT_EQ(x, b.bytes(3000));
    EXPECT_NE(x, c.bytes(3000));
}

TEST(Random, UniformStaysInRange)
{
    SeededRandom rng(1);
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 7000; ++i) {
        auto v = rng.uniform(7);
        ASSERT_LT(v, 7u);
        ++hist[v];
    }
    for (int h : hist) EXPECT_GT(h, 800);
}

TEST(Crypto, Sha256KnownAnswer)
{
    EXPECT_EQ(to_hex(crypto::sha256(std::string_view("abc"))),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    crypto::Sha256 h;
    h.update(std::string_view("a")).update(std::string_view("bc"));
    EXPECT_EQ(h.finish(), crypto::sha256(std::string_view("abc")));
}

TEST(Crypto, AeadRoundTripAndTamper)
{
    crypto::AeadKey key{};
    key[0] = 1;
    crypto::AeadNonce nonce{};
    auto pt = to_bytes("payload");
    auto ct = crypto::aead_seal(key, nonce, pt, to_bytes("aad"));
    EXPECT_EQ(ct.size(), pt.size() + crypto::kAeadTagSize);
    EXPECT_EQ(crypto::aead_open(key, nonce, ct, to_bytes("aad")), pt);
    EXPECT_FALSE(crypto::aead_open(key, nonce, ct, to_bytes("other")));
    ct[0] ^= 1;
    EXPECT_FALSE(crypto::aead_open(key, nonce, ct, to_bytes("aad")));
}

TEST(Crypto, AeadEmptyPlaintext)
{
    crypto::AeadKey key{};
    crypto::AeadNonce nonce{};
    auto ct = crypto::aead_seal(key, nonce, {});
    EXPECT_EQ(crypto::aead_open(key, nonce, ct), Bytes{});
}

TEST(Clock, SimulatedNeverGoesBack)
{
    SimulatedClock c(1000);
    c.advance_ms(500);
    EXPECT_EQ(c.now_ms(), 1500);
    c.advance_to(1200);
    EXPECT_EQ(c.now_ms(), 1500);
    c.advance_to(2000);
    EXPECT_EQ(c.now_ms(), 2000);
}
