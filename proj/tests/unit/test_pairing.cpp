#include <gtest/gtest.h>

#include "dw/pairing/group.hpp"

using namespace dw;
using namespace dw::pairing;

TEST(Scalar, FieldArithmetic)
{
    SeededRandom rng(1);
    for (int i = 0; i < 50; ++i) {
        auto a = Scalar::random_nonzero(rng);
        auto b = Scalar::random(rng);
        EXPECT_EQ(a * a.inverse(), Scalar::one());
        EXPECT_EQ((a + b) - b, a);
        EXPECT_EQ(a + (-a), Scalar::zero());
        EXPECT_EQ(Scalar::from_bytes(a.to_bytes()), a);
    }
    EXPECT_EQ(Scalar::from_u64(6), Scalar::from_u64(2) * Scalar::from_u64(3));
    EXPECT_THROW(Scalar::zero().inverse(), Error);
}

TEST(Scalar, RejectsOutOfRangeEncoding)
{
    Bytes all_ff(32, 0xff);
    EXPECT_THROW(Scalar::from_bytes(all_ff), DecodeError);
    EXPECT_THROW(Scalar::from_bytes(Bytes(31, 0)), DecodeError);
}

TEST(Groups, EncodingRoundTrip)
{
    SeededRandom rng(2);
    auto k = Scalar::random(rng);
    auto p = G1::generator() * k;
    auto q = G2::generator() * k;
    EXPECT_EQ(G1::from_bytes(p.to_bytes()), p);
    EXPECT_EQ(G2::from_bytes(q.to_bytes()), q);
    EXPECT_EQ(G1::from_bytes(G1::identity().to_bytes()), G1::identity());
    auto bad = p.to_bytes();
    bad[5] ^= 0x40;
    EXPECT_THROW(G1::from_bytes(bad), DecodeError);
}

TEST(Groups, ScalarMultiplicationDistributes)
{
    SeededRandom rng(3);
    auto a = Scalar::random(rng);
    auto b = Scalar::random(rng);
    EXPECT_EQ(G1::generator() * (a + b), G1::generator() * a + G1::generator() * b);
    EXPECT_EQ(G2::generator() * (a * b), (G2::generator() * a) * b);
    EXPECT_TRUE((G1::generator() * Scalar::zero()).is_identity());
}

TEST(Groups, HashIsDeterministicAndSeparating)
{
    EXPECT_EQ(G1::hash("doctor"), G1::hash("doctor"));
    EXPECT_NE(G1::hash("doctor"), G1::hash("Doctor"));
    EXPECT_FALSE(G1::hash("").is_identity());
}

TEST(Pairing, Bilinear)
{
    SeededRandom rng(4);
    auto a = Scalar::random_nonzero(rng);
    auto b = Scalar::random_nonzero(rng);
    auto e = pair(G1::generator(), G2::generator());
    EXPECT_FALSE(e.is_one());
    EXPECT_EQ(pair(G1::generator() * a, G2::generator() * b), e.pow(a * b));
    EXPECT_EQ(pair(G1::generator() * a, G2::generator()), pair(G1::generator(), G2::generator() * a));
}

TEST(Gt, PowAndInverse)
{
    SeededRandom rng(5);
    auto e = pair(G1::generator(), G2::generator());
    auto a = Scalar::random(rng);
    auto b = Scalar::random(rng);
    EXPECT_EQ(e.pow(a) * e.pow(b), e.pow(a + b));
    EXPECT_EQ(e.pow(a).inverse(), e.pow(-a));
    EXPECT_EQ(e.pow(a) / e.pow(a), GT::one());
    EXPECT_EQ(e.pow(Scalar::zero()), GT::one());
    EXPECT_EQ(e.pow(Scalar::one()), e);
    EXPECT_EQ(e.pow(Scalar::from_u64(3)), e * e * e);
}

TEST(Gt, EncodingRoundTrip)
{
    auto e = pair(G1::generator(), G2::generator());
    EXPECT_EQ(GT::from_bytes(e.to_bytes()), e);
    auto bad = e.to_bytes();
    bad[100] ^= 1;
    EXPECT_THROW(GT::from_bytes(bad), DecodeError);
}

TEST(Pairing, CounterCountsCalls)
{
    reset_pairing_count();
    pair(G1::generator(), G2::generator());
    pair(G1::generator(), G2::generator());
    EXPECT_EQ(pairing_count(), 2u);
    reset_pairing_count();
    EXPECT_EQ(pairing_count(), 0u);
}
