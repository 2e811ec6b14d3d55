#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "dw/sharding/gf256.hpp"
#include "dw/sharding/shamir.hpp"

using namespace dw;
using namespace dw::sharding;

namespace {

// Carry-less multiply with reduction, bit by bit.
std::uint8_t slow_mul(std::uint8_t a, std::uint8_t b)
{
    std::uint8_t p = 0;
    for (int i = 0; i < 8; ++i) {
        if (b & 1) p ^= a;
        const bool carry = a & 0x80;
        a = static_cast<std::uint8_t>(a << 1);
        if (carry) a ^= 0x1b;
        b >>= 1;
    }
    return p;
}

std::vector<Share> pick(const std::vector<Share>& all, std::vector<int> idx)
{
    std::vector<Share> out;
    for (int i : idx) out.push_back(all[i]);
    return out;
}

} // namespace

TEST(Gf256, MatchesBitwiseMultiply)
{
    for (int a = 0; a < 256; ++a) {
        for (int b = 0; b < 256; ++b) {
            ASSERT_EQ(gf256::mul(a, b), slow_mul(a, b)) << a << "*" << b;
        }
    }
}

TEST(Gf256, Inverse)
{
    for (int a = 1; a < 256; ++a) EXPECT_EQ(gf256::mul(a, gf256::inv(a)), 1) << a;
    EXPECT_EQ(gf256::mul(0x53, 0xca), 0x01);
}

TEST(DefaultThreshold, Examples)
{
    EXPECT_EQ(default_threshold(4), 2u);
    EXPECT_EQ(default_threshold(5), 3u);
    EXPECT_EQ(default_threshold(2), 2u);
    EXPECT_EQ(default_threshold(3), 2u);
    EXPECT_EQ(default_threshold(10), 5u);
    EXPECT_THROW(default_threshold(1), TooFewLocations);
    EXPECT_THROW(default_threshold(0), TooFewLocations);
}

TEST(Split, AnyTwoOfThree)
{
    SeededRandom rng(1);
    auto data = to_bytes("the quick brown fox");
    auto shares = split("f", data, 3, 2, rng);
    ASSERT_EQ(shares.size(), 3u);
    EXPECT_EQ(combine(pick(shares, {0, 1})), data);
    EXPECT_EQ(combine(pick(shares, {0, 2})), data);
    EXPECT_EQ(combine(pick(shares, {2, 1})), data);
}

TEST(Split, BelowThreshold)
{
    SeededRandom rng(2);
    auto shares = split("f", to_bytes("secret"), 5, 3, rng);
    EXPECT_THROW(combine(pick(shares, {0, 4})), ThresholdNotMet);
    EXPECT_THROW(combine({}), ThresholdNotMet);
    // A repeated share does not count twice.
    EXPECT_THROW(combine(pick(shares, {1, 1, 3})), ThresholdNotMet);
}

TEST(Split, InvalidParameters)
{
    SeededRandom rng(3);
    EXPECT_THROW(split("f", to_bytes("x"), 3, 1, rng), InvalidThreshold);
    EXPECT_THROW(split("f", to_bytes("x"), 3, 4, rng), InvalidThreshold);
    EXPECT_THROW(split("f", to_bytes("x"), 256, 2, rng), InvalidThreshold);
    EXPECT_THROW(split("f", {}, 3, 2, rng), ShardingError);
}

TEST(Split, MebibytePayloadSize)
{
    SeededRandom rng(4);
    auto data = rng.bytes(1 << 20);
    auto shares = split("big", data, 5, 3, rng);
    for (const auto& s : shares) EXPECT_EQ(s.payload.size(), data.size());
    EXPECT_EQ(combine(pick(shares, {4, 0, 2})), data);
}

TEST(Split, DistinctCoordinatesAndLabels)
{
    SeededRandom rng(5);
    auto shares = split("doc-7", to_bytes("abc"), 10, 4, rng);
    std::set<int> xs;
    for (const auto& s : shares) {
        xs.insert(s.x());
        EXPECT_EQ(s.file_id, "doc-7");
        EXPECT_EQ(s.total, 10);
        EXPECT_EQ(s.threshold, 4);
    }
    EXPECT_EQ(xs.size(), 10u);
}

TEST(Split, AllSubsetsReconstruct)
{
    SeededRandom rng(6);
    for (int trial = 0; trial < 40; ++trial) {
        const unsigned n = 2 + rng.uniform(6);
        const unsigned t = 2 + rng.uniform(n - 1);
        auto data = rng.bytes(1 + rng.uniform(200));
        auto shares = split("f", data, n, t, rng);
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        for (int round = 0; round < 5; ++round) {
            for (std::size_t i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.uniform(i + 1)]);
            ASSERT_EQ(combine(pick(shares, std::vector<int>(idx.begin(), idx.begin() + t))), data);
            ASSERT_THROW(combine(pick(shares, std::vector<int>(idx.begin(), idx.begin() + t - 1))), ThresholdNotMet);
        }
    }
}

TEST(Split, SingleShareLooksUniform)
{
    // Fixed data byte, many splits: share 1's byte should hit every value.
    SeededRandom rng(7);
    std::vector<int> hist(256, 0);
    const Bytes data{0x42};
    for (int i = 0; i < 256 * 40; ++i) ++hist[split("f", data, 3, 2, rng)[0].payload[0]];
    double chi = 0;
    for (int h : hist) chi += (h - 40.0) * (h - 40.0) / 40.0;
    // 255 degrees of freedom; p < 1e-6 above roughly 380.
    EXPECT_LT(chi, 380.0);
}

TEST(Combine, CorruptedByteChangesOutput)
{
    SeededRandom rng(8);
    auto data = rng.bytes(64);
    auto shares = split("f", data, 3, 2, rng);
    shares[0].payload[10] ^= 0x01;
    auto out = combine(pick(shares, {0, 1}));
    EXPECT_NE(out, data);
    EXPECT_EQ(out[11], data[11]);
}

TEST(Combine, InconsistentMetadata)
{
    SeededRandom rng(9);
    auto a = split("a", to_bytes("xyz"), 3, 2, rng);
    auto b = split("b", to_bytes("xyz"), 3, 2, rng);
    EXPECT_THROW(combine({a[0], b[1]}), InconsistentShares);
    auto c = a;
    c[1].payload.push_back(0);
    EXPECT_THROW(combine({c[0], c[1]}), InconsistentShares);
    auto d = a[0];
    d.payload[0] ^= 1;
    EXPECT_THROW(combine({a[0], d, a[1]}), InconsistentShares);
}

TEST(ShareFile, RoundTrip)
{
    SeededRandom rng(10);
    auto s = split("platform:social", to_bytes("hello"), 4, 2, rng)[3];
    auto bytes = encode_share(s);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "DWSHARE1");
    EXPECT_EQ(decode_share(bytes), s);
    bytes.pop_back();
    EXPECT_THROW(decode_share(bytes), DecodeError);
}

TEST(Manifest, AppendOnlyUnique)
{
    ShareManifest m;
    m.record({"f", 2, "loc-b"});
    m.record({"f", 1, "loc-a"});
    m.record({"g", 1, "loc-a"});
    EXPECT_THROW(m.record({"f", 1, "loc-c"}), ShardingError);
    auto p = m.placements("f");
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0].location_id, "loc-a");
    EXPECT_EQ(m.files(), (std::vector<std::string>{"f", "g"}));
}
