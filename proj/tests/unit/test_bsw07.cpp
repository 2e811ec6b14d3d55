#include <gtest/gtest.h>

#include "dw/bsw07/bsw07.hpp"
#include "dw/pdcpabe/scheme.hpp"
#include "support/random_policy.hpp"

using namespace dw;
using dw::policy::parse_policy;

namespace {

struct Bsw07Test : ::testing::Test {
    SeededRandom rng{2024};
    std::pair<bsw07::PublicParams, bsw07::MasterKey> sys = bsw07::setup(rng);
    const bsw07::PublicParams& pp = sys.first;
    const bsw07::MasterKey& mk = sys.second;
};

} // namespace

TEST_F(Bsw07Test, SingleAttribute)
{
    auto ct = bsw07::encrypt(pp, to_bytes("hello"), parse_policy("A"), rng);
    EXPECT_EQ(bsw07::decrypt(pp, bsw07::keygen(pp, mk, {"A"}, rng), ct), to_bytes("hello"));
    EXPECT_FALSE(bsw07::decrypt(pp, bsw07::keygen(pp, mk, {"B"}, rng), ct));
}

TEST_F(Bsw07Test, SetupConsistent)
{
    EXPECT_EQ(pairing::pair(pp.h, pp.f), pairing::pair(pp.g1, pp.g2));
    EXPECT_EQ(pairing::pair(pp.g1, mk.g_alpha), pp.egg_alpha);
}

TEST_F(Bsw07Test, OneMessagePerCiphertext)
{
    auto p = parse_policy("(A and B)");
    auto c1 = bsw07::encrypt(pp, to_bytes("m"), p, rng);
    auto c2 = bsw07::encrypt(pp, to_bytes("m"), p, rng);
    EXPECT_NE(c1.c, c2.c);
    EXPECT_EQ(c1.leaves.size(), 2u);
}

TEST_F(Bsw07Test, RandomOracle)
{
    for (int trial = 0; trial < 150; ++trial) {
        auto p = testgen::random_policy(rng, 6, 4);
        auto attrs = testgen::random_attrs(rng, 6);
        if (attrs.empty()) attrs.insert("F");
        auto msg = rng.bytes(1 + rng.uniform(40));
        auto out = bsw07::decrypt(pp, bsw07::keygen(pp, mk, attrs, rng), bsw07::encrypt(pp, msg, p, rng));
        ASSERT_EQ(out.has_value(), policy::evaluate(p, attrs)) << p.to_string();
        if (out) ASSERT_EQ(*out, msg);
    }
}

TEST_F(Bsw07Test, MergedKeyFails)
{
    auto ct = bsw07::encrypt(pp, to_bytes("x"), parse_policy("(A and B)"), rng);
    auto k1 = bsw07::keygen(pp, mk, {"A"}, rng);
    auto k2 = bsw07::keygen(pp, mk, {"B"}, rng);
    auto merged = k1;
    merged.attrs.insert("B");
    merged.components["B"] = k2.components.at("B");
    EXPECT_FALSE(bsw07::decrypt(pp, merged, ct));
}

TEST_F(Bsw07Test, SerializationRoundTrip)
{
    auto ct = bsw07::encrypt(pp, to_bytes("payload"), parse_policy("((A and B) or C)"), rng);
    auto bytes = bsw07::serialize(ct);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "BSW07---");
    auto back = bsw07::deserialize_ciphertext(bytes);
    EXPECT_EQ(bsw07::serialize(back), bytes);
    EXPECT_EQ(bsw07::decrypt(pp, bsw07::keygen(pp, mk, {"C"}, rng), back), to_bytes("payload"));
    EXPECT_THROW(bsw07::deserialize_ciphertext(ByteView(bytes).first(bytes.size() - 3)), DecodeError);
}

TEST_F(Bsw07Test, AgreesWithPdcpabe)
{
    auto [ppd, mkd] = pdcpabe::setup(128, rng);
    for (int trial = 0; trial < 60; ++trial) {
        auto p = testgen::random_policy(rng, 5, 3);
        auto attrs = testgen::random_attrs(rng, 5);
        if (attrs.empty()) attrs.insert("A");
        auto b = bsw07::decrypt(pp, bsw07::keygen(pp, mk, attrs, rng), bsw07::encrypt(pp, to_bytes("m"), p, rng));
        auto ct = pdcpabe::encrypt(ppd, {{"m", to_bytes("m"), p}}, rng);
        auto r = pdcpabe::decrypt(ppd, pdcpabe::keygen(mkd, ppd, attrs, rng), ct);
        ASSERT_EQ(b.has_value(), r.recovered.count("m") == 1) << p.to_string();
    }
}
