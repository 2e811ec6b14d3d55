#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "dw/pdcpabe/scheme.hpp"
#include "support/random_policy.hpp"

using namespace dw;
using namespace dw::pdcpabe;
using dw::policy::parse_policy;

namespace {

class PdcpabeTest : public ::testing::Test {
protected:
    static void SetUpTestSuite()
    {
        SeededRandom rng(1000);
        auto [p, m] = setup(128, rng);
        pp_ = new PublicParams(p);
        mk_ = new MasterKey(m);
    }
    static void TearDownTestSuite()
    {
        delete pp_;
        delete mk_;
    }

    const PublicParams& pp() const { return *pp_; }
    const MasterKey& mk() const { return *mk_; }

    UserKey key(AttributeSet attrs) { return keygen(mk(), pp(), attrs, rng_); }

    std::vector<PlainItem> items(std::initializer_list<std::pair<const char*, const char*>> list)
    {
        std::vector<PlainItem> out;
        for (auto [id, text] : list) out.push_back({id, to_bytes(std::string("body of ") + id), parse_policy(text)});
        return out;
    }

    static std::set<std::string> recovered_ids(const DecryptionReport& r)
    {
        std::set<std::string> s;
        for (const auto& [id, b] : r.recovered) s.insert(id);
        return s;
    }

    SeededRandom rng_{77};

private:
    static inline PublicParams* pp_ = nullptr;
    static inline MasterKey* mk_ = nullptr;
};

} // namespace

TEST_F(PdcpabeTest, SetupIsConsistent)
{
    const auto e = pairing::pair(pp().g1, pp().g2);
    EXPECT_EQ(pairing::pair(pp().f1, pp().g2), e.pow(mk().beta1));
    EXPECT_EQ(pairing::pair(pp().f3, pp().g2), e.pow(mk().beta3));
    EXPECT_EQ(pairing::pair(pp().g1, mk().g_alpha), pp().egg_alpha);
    EXPECT_FALSE(pp().f1.is_identity());
}

TEST_F(PdcpabeTest, SetupIsFreshEachCall)
{
    auto [a, ma] = setup(128);
    auto [b, mb] = setup(128);
    EXPECT_NE(a.egg_alpha, b.egg_alpha);
}

TEST_F(PdcpabeTest, UnsupportedLevels)
{
    EXPECT_THROW(setup(80), UnsupportedSecurityLevel);
    EXPECT_THROW(setup(256), UnsupportedSecurityLevel);
}

TEST_F(PdcpabeTest, KeygenShape)
{
    AttributeSet attrs;
    for (int i = 0; i < 30; ++i) attrs.insert("a" + std::to_string(i));
    auto k = key(attrs);
    EXPECT_EQ(k.element_count(), 62u);
    EXPECT_THROW(key({}), EmptyAttributeSet);
}

TEST_F(PdcpabeTest, KeygenDeterministicUnderSeed)
{
    SeededRandom r1(5), r2(5);
    auto k1 = keygen(mk(), pp(), {"A", "B"}, r1);
    auto k2 = keygen(mk(), pp(), {"A", "B"}, r2);
    EXPECT_EQ(serialize(k1), serialize(k2));
}

TEST_F(PdcpabeTest, SingleAttributeRoundTrip)
{
    auto ct = encrypt(pp(), items({{"m1", "A"}}), rng_);
    EXPECT_EQ(ct.data_nodes.size(), 1u);
    EXPECT_EQ(ct.attribute_pair_count(), 1u);
    auto r = decrypt(pp(), key({"A"}), ct);
    EXPECT_EQ(r.recovered.at("m1"), to_bytes("body of m1"));
    EXPECT_TRUE(r.denied.empty());
}

TEST_F(PdcpabeTest, CommutedPoliciesShareOneKey)
{
    auto ct = encrypt(pp(), items({{"m1", "(A and B)"}, {"m2", "(B and A)"}}), rng_);
    EXPECT_EQ(ct.data_nodes.size(), 1u);
    EXPECT_EQ(ct.payloads.size(), 2u);
    EXPECT_EQ(ct.payloads[0].file_group_id, ct.payloads[1].file_group_id);
    EXPECT_EQ(recovered_ids(decrypt(pp(), key({"A", "B"}), ct)), (std::set<std::string>{"m1", "m2"}));
}

TEST_F(PdcpabeTest, PairCountIndependentOfItemCount)
{
    std::vector<PlainItem> two, hundred;
    auto p1 = parse_policy("((A and B) or C)");
    auto p2 = parse_policy("(D and (E or F))");
    two.push_back({"x", to_bytes("x"), p1});
    two.push_back({"y", to_bytes("y"), p2});
    for (int i = 0; i < 100; ++i) {
        hundred.push_back({"m" + std::to_string(i), to_bytes(std::to_string(i)), rng_.uniform(2) ? p1 : p2});
    }
    auto small = encrypt(pp(), two, rng_);
    auto big = encrypt(pp(), hundred, rng_);
    EXPECT_EQ(big.data_nodes.size(), 2u);
    EXPECT_EQ(big.attribute_pair_count(), small.attribute_pair_count());
}

TEST_F(PdcpabeTest, PartialDecryptionFigureSeven)
{
    auto ct = encrypt(pp(), items({{"f1", "(A and B)"}, {"f2", "C"}}), rng_);
    auto r = decrypt(pp(), key({"C"}), ct);
    EXPECT_EQ(recovered_ids(r), std::set<std::string>{"f2"});
    ASSERT_EQ(r.denied.size(), 1u);
    EXPECT_EQ(r.denied[0].payload_id, "f1");
    EXPECT_EQ(r.denied[0].reason, DenialReason::PolicyNotSatisfied);
}

TEST_F(PdcpabeTest, RandomOracleRoundTrip)
{
    SeededRandom rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<PlainItem> in;
        const auto n = 1 + rng.uniform(5);
        for (std::size_t i = 0; i < n; ++i) {
            in.push_back({"p" + std::to_string(i), rng.bytes(1 + rng.uniform(64)), testgen::random_policy(rng, 6, 3)});
        }
        auto ct = encrypt(pp(), in, rng);
        auto attrs = testgen::random_attrs(rng, 6);
        if (attrs.empty()) attrs.insert("A");
        auto r = decrypt(pp(), keygen(mk(), pp(), attrs, rng), ct);
        ASSERT_EQ(r.recovered.size() + r.denied.size(), in.size());
        for (const auto& it : in) {
            const bool ok = policy::evaluate(it.policy, attrs);
            ASSERT_EQ(r.recovered.count(it.payload_id) == 1, ok) << it.policy.to_string();
            if (ok) ASSERT_EQ(r.recovered.at(it.payload_id), it.data);
        }
    }
}

TEST_F(PdcpabeTest, CollusionFails)
{
    auto ct = encrypt(pp(), items({{"m", "(A and B)"}}), rng_);
    auto k1 = key({"A"});
    auto k2 = key({"B"});
    EXPECT_TRUE(decrypt(pp(), k1, ct).recovered.empty());
    EXPECT_TRUE(decrypt(pp(), k2, ct).recovered.empty());

    for (const UserKey* base : {&k1, &k2}) {
        UserKey merged = *base;
        merged.attrs = {"A", "B"};
        merged.components["A"] = k1.components.at("A");
        merged.components["B"] = k2.components.at("B");
        auto r = decrypt(pp(), merged, ct);
        EXPECT_TRUE(r.recovered.empty());
        ASSERT_EQ(r.denied.size(), 1u);
        EXPECT_EQ(r.denied[0].reason, DenialReason::AuthenticationFailed);
    }
}

TEST_F(PdcpabeTest, TamperedPayloadIsLocal)
{
    auto ct = encrypt(pp(), items({{"a", "A"}, {"b", "A"}}), rng_);
    ct.payloads[0].sealed[0] ^= 1;
    auto r = decrypt(pp(), key({"A"}), ct);
    EXPECT_EQ(recovered_ids(r), std::set<std::string>{"b"});
    ASSERT_EQ(r.denied.size(), 1u);
    EXPECT_EQ(r.denied[0].reason, DenialReason::AuthenticationFailed);
}

TEST_F(PdcpabeTest, EmptyInputRejected)
{
    EXPECT_THROW(encrypt(pp(), {}, rng_), EmptyInput);
}

TEST_F(PdcpabeTest, SharedSubPolicySavesPairs)
{
    // Frozen from the census: standalone trees hold 2 + 3 leaves; the shared
    // AND node is propagated once, leaving one new pair for C.
    auto ct = encrypt(pp(), items({{"f1", "(A and B)"}, {"f2", "((A and B) and C)"}}), rng_);
    EXPECT_EQ(ct.attribute_pair_count(), 3u);
    EncryptOptions no_reuse;
    no_reuse.reuse_shared_nodes = false;
    auto plain = encrypt(pp(), items({{"f1", "(A and B)"}, {"f2", "((A and B) and C)"}}), rng_, no_reuse);
    EXPECT_EQ(plain.attribute_pair_count(), 5u);

    auto r = decrypt(pp(), key({"A", "B", "C"}), ct);
    EXPECT_EQ(r.recovered.size(), 2u);
    EXPECT_EQ(recovered_ids(decrypt(pp(), key({"A", "B"}), ct)), std::set<std::string>{"f1"});
    EXPECT_TRUE(decrypt(pp(), key({"A", "C"}), ct).recovered.empty());
}

TEST_F(PdcpabeTest, SharedAttributeLeafSavesPair)
{
    auto ct = encrypt(pp(), items({{"f1", "A"}, {"f2", "(A and B)"}}), rng_);
    EXPECT_EQ(ct.attribute_pair_count(), 2u);
    EXPECT_EQ(recovered_ids(decrypt(pp(), key({"A"}), ct)), std::set<std::string>{"f1"});
    EXPECT_EQ(recovered_ids(decrypt(pp(), key({"B"}), ct)), std::set<std::string>{});
    EXPECT_EQ(recovered_ids(decrypt(pp(), key({"A", "B"}), ct)), (std::set<std::string>{"f1", "f2"}));
}

TEST_F(PdcpabeTest, OrParentCannotReuseSharedChild)
{
    // The OR node hands its value to both branches, so linking its AND
    // branch to F1's secret would let a holder of C open F1. The pair count
    // therefore matches two standalone trees (2 + 3).
    auto ct = encrypt(pp(), items({{"f1", "(A and B)"}, {"f2", "((A and B) or C)"}}), rng_);
    EXPECT_EQ(ct.attribute_pair_count(), 5u);
    EXPECT_EQ(recovered_ids(decrypt(pp(), key({"C"}), ct)), std::set<std::string>{"f2"});
    EXPECT_EQ(recovered_ids(decrypt(pp(), key({"B", "C"}), ct)), std::set<std::string>{"f2"});
    EXPECT_EQ(recovered_ids(decrypt(pp(), key({"A", "B"}), ct)), (std::set<std::string>{"f1", "f2"}));
}

TEST_F(PdcpabeTest, CachingReducesPairings)
{
    auto ct = encrypt(pp(), items({{"f1", "(A and B)"}, {"f2", "((A and B) and C)"}}), rng_);
    auto k = key({"A", "B", "C"});
    pairing::reset_pairing_count();
    auto cached = decrypt(pp(), k, ct);
    const auto with_cache = pairing::pairing_count();
    pairing::reset_pairing_count();
    DecryptOptions off;
    off.cache_shared = false;
    auto uncached = decrypt(pp(), k, ct, off);
    const auto without_cache = pairing::pairing_count();
    EXPECT_EQ(cached.recovered, uncached.recovered);
    // 3 leaves x 2 + 2 data nodes x 2, against 4 + 6 leaf pairings uncached.
    EXPECT_EQ(with_cache, 10u);
    EXPECT_EQ(without_cache, 14u);
}

TEST_F(PdcpabeTest, CachingNeverCostsMore)
{
    SeededRandom rng(41);
    for (int trial = 0; trial < 15; ++trial) {
        std::vector<PlainItem> in;
        for (int i = 0; i < 4; ++i) in.push_back({"p" + std::to_string(i), to_bytes("x"), testgen::random_policy(rng, 4, 3)});
        auto ct = encrypt(pp(), in, rng);
        auto k = key({"A", "B", "C", "D"});
        pairing::reset_pairing_count();
        decrypt(pp(), k, ct);
        auto a = pairing::pairing_count();
        pairing::reset_pairing_count();
        DecryptOptions off;
        off.cache_shared = false;
        decrypt(pp(), k, ct, off);
        ASSERT_LE(a, pairing::pairing_count());
    }
}

TEST_F(PdcpabeTest, ExponentAlgebraCancelsNoise)
{
    // C * e(g,g)^(rs) * e(C3, D3) / e(C1, D1) with explicit exponents.
    SeededRandom rng(51);
    auto alpha = pairing::Scalar::random_nonzero(rng);
    auto b1 = pairing::Scalar::random_nonzero(rng);
    auto b3 = pairing::Scalar::random_nonzero(rng);
    auto r = pairing::Scalar::random_nonzero(rng);
    auto s = pairing::Scalar::random(rng);
    auto eps = pairing::Scalar::random(rng);
    auto g1 = G1::generator();
    auto g2 = G2::generator();
    auto e = pairing::pair(g1, g2);
    auto ck = e.pow(pairing::Scalar::random(rng));
    auto c = ck * e.pow(alpha * (s + eps));
    auto c1 = g1 * (b1 * (s + eps));
    auto c3 = g1 * (b3 * eps);
    auto d1 = g2 * ((alpha + r) * b1.inverse());
    auto d3 = g2 * (r * b3.inverse());
    auto a = e.pow(r * s);
    EXPECT_EQ(c * a * pairing::pair(c3, d3) / pairing::pair(c1, d1), ck);
}

TEST_F(PdcpabeTest, ComponentsMatchTracedExponents)
{
    EncryptTrace trace;
    EncryptOptions opts;
    opts.trace = &trace;
    auto ct = encrypt(pp(), items({{"f1", "(A and B)"}, {"f2", "((A and B) and C)"}, {"f3", "((A and B) or (C or D))"}}),
                      rng_, opts);
    ASSERT_EQ(trace.groups.size(), ct.data_nodes.size());
    for (std::size_t i = 0; i < ct.data_nodes.size(); ++i) {
        const auto& d = ct.data_nodes[i];
        const auto& t = trace.groups[i];
        EXPECT_EQ(d.c1, pp().f1 * (t.s + t.eps));
        EXPECT_EQ(d.c2, pp().f2 * (t.s + t.eps));
        EXPECT_EQ(d.c3, pp().f3 * t.eps);
        EXPECT_EQ(d.c, t.ck * pp().egg_alpha.pow(t.s + t.eps));
        EXPECT_EQ(trace.instance_values[d.root_instance], t.s);
    }
    // Every gate instance is consistent with its children at x = 0.
    for (std::size_t i = 0; i < ct.instances.size(); ++i) {
        const auto& in = ct.instances[i];
        const auto& node = ct.dag.node(in.node);
        const auto v = trace.instance_values[i];
        if (node.kind == policy::NodeKind::Attribute) {
            const auto& pairs = ct.attr_cts.at(in.node);
            auto it = std::find_if(pairs.begin(), pairs.end(), [&](const AttributePair& p) { return p.tag == i; });
            ASSERT_NE(it, pairs.end());
            EXPECT_EQ(it->c_hat, pp().g2 * v);
            EXPECT_EQ(it->c_hat_prime, G1::hash(node.label) * v);
        } else if (in.children.size() == 1 || node.gate == policy::Gate::Or) {
            for (auto c : in.children) EXPECT_EQ(trace.instance_values[c], v);
        } else {
            const auto xl = ct.indices[node.children[0]];
            const auto xr = ct.indices[node.children[1]];
            const auto yl = trace.instance_values[in.children[0]];
            const auto yr = trace.instance_values[in.children[1]];
            EXPECT_EQ(yl * xr * (xr - xl).inverse() + yr * xl * (xl - xr).inverse(), v);
        }
    }
}

TEST_F(PdcpabeTest, SerializationRoundTrip)
{
    auto ct = encrypt(pp(), items({{"f1", "(A and B)"}, {"f2", "((A and B) or C)"}, {"f3", "D"}}), rng_);
    auto bytes = serialize(ct);
    ASSERT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "PDCPABE1");
    auto back = deserialize_ciphertext(bytes);
    EXPECT_EQ(serialize(back), bytes);
    EXPECT_EQ(recovered_ids(decrypt(pp(), key({"A", "B"}), back)), (std::set<std::string>{"f1", "f2"}));

    EXPECT_EQ(serialize(deserialize_public_params(serialize(pp()))), serialize(pp()));
    EXPECT_EQ(serialize(deserialize_master_key(serialize(mk()))), serialize(mk()));
    auto k = key({"X", "Y"});
    EXPECT_EQ(serialize(deserialize_user_key(serialize(k))), serialize(k));
}

TEST_F(PdcpabeTest, MalformedContainersRejected)
{
    auto ct = encrypt(pp(), items({{"f1", "(A and B)"}}), rng_);
    auto bytes = serialize(ct);
    for (std::size_t cut : {std::size_t{4}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
        EXPECT_THROW(deserialize_ciphertext(ByteView(bytes).first(cut)), MalformedCiphertext);
    }
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW(deserialize_ciphertext(bad_magic), MalformedCiphertext);

    auto dangling = ct;
    dangling.instances[dangling.data_nodes[0].root_instance].children[0] = 999;
    EXPECT_THROW(decrypt(pp(), key({"A", "B"}), dangling), MalformedCiphertext);

    auto missing = ct;
    missing.attr_cts.erase(missing.attr_cts.begin());
    EXPECT_THROW(decrypt(pp(), key({"A", "B"}), missing), MalformedCiphertext);

    auto orphan = ct;
    orphan.payloads[0].file_group_id = "nope";
    EXPECT_THROW(validate(orphan), MalformedCiphertext);
}

TEST_F(PdcpabeTest, SerializedCiphertextCarriesNoSecrets)
{
    EncryptTrace trace;
    EncryptOptions opts;
    opts.trace = &trace;
    auto ct = encrypt(pp(), items({{"f1", "(A and B)"}, {"f2", "((A and B) and C)"}, {"f3", "(C or D)"}}), rng_, opts);
    auto bytes = serialize(ct);
    auto contains = [&](const Bytes& needle) {
        return std::search(bytes.begin(), bytes.end(), needle.begin(), needle.end()) != bytes.end();
    };
    std::vector<pairing::Scalar> secrets = trace.instance_values;
    secrets.insert(secrets.end(), trace.coefficients.begin(), trace.coefficients.end());
    for (const auto& g : trace.groups) {
        secrets.push_back(g.s);
        secrets.push_back(g.eps);
        secrets.push_back(g.s + g.eps);
        EXPECT_FALSE(contains(g.ck.to_bytes()));
    }
    for (const auto& s : secrets) {
        auto be = s.to_bytes();
        Bytes le(be.rbegin(), be.rend());
        EXPECT_FALSE(contains(be));
        EXPECT_FALSE(contains(le));
    }
}
