#include <gtest/gtest.h>

#include <filesystem>

#include "dw/ledger/chain.hpp"
#include "dw/ledger/inspector.hpp"

using namespace dw;
using namespace dw::ledger;

namespace {

// Independent encoding of the entry hash input.
Hash oracle_hash(const LogEntry& e)
{
    Bytes buf;
    auto be = [&](std::uint64_t v, int n) {
        for (int i = n - 1; i >= 0; --i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    be(e.seq, 8);
    be(static_cast<std::uint64_t>(e.timestamp), 8);
    be(e.actor.size(), 4);
    buf.insert(buf.end(), e.actor.begin(), e.actor.end());
    buf.push_back(static_cast<std::uint8_t>(e.action));
    be(e.subject.size(), 4);
    buf.insert(buf.end(), e.subject.begin(), e.subject.end());
    buf.insert(buf.end(), e.payload_digest.begin(), e.payload_digest.end());
    buf.insert(buf.end(), e.prev_hash.begin(), e.prev_hash.end());
    return crypto::sha256(buf);
}

HashChain chain_of(std::size_t n)
{
    HashChain c;
    for (std::size_t i = 0; i < n; ++i) {
        c.append("actor" + std::to_string(i % 3), static_cast<Action>(1 + i % 15), "will-" + std::to_string(i % 2),
                 as_view("payload " + std::to_string(i)), static_cast<TimestampMs>(1000 * i));
    }
    return c;
}

struct Trace {
    HashChain chain;
    TimestampMs now = 1'000'000;

    Trace& at(TimestampMs t)
    {
        now = t;
        return *this;
    }
    Trace& add(Action a, std::string actor = "broker")
    {
        chain.append(std::move(actor), a, "w", as_view(std::string(to_string(a))), now);
        return *this;
    }
};

Trace compliant()
{
    Trace t;
    t.add(Action::DeployWill, "ada").add(Action::TriggerRequest, "bob").add(Action::VoteCast, "bob");
    t.add(Action::VoteCast, "cy").add(Action::FreezeStart);
    t.at(1'000'000 + 3'600'000).add(Action::Activate).add(Action::PullData).add(Action::EncryptData);
    t.add(Action::SplitUpload).add(Action::KeyDistribute).add(Action::RetrieveShares, "bob");
    return t;
}

const ParamsMap kParams = {{"w", {2, 3'600'000}}};

} // namespace

TEST(Chain, GenesisLinksToZero)
{
    HashChain c;
    const auto& e = c.append("a", Action::DeployWill, "w", as_view("x"), 5);
    EXPECT_EQ(e.seq, 0u);
    EXPECT_EQ(e.prev_hash, Hash{});
    EXPECT_EQ(e.payload_digest, crypto::sha256("x"));
    EXPECT_EQ(e.entry_hash, oracle_hash(e));
}

TEST(Chain, SecondLinksToFirst)
{
    auto c = chain_of(2);
    EXPECT_EQ(c.entries()[1].prev_hash, c.entries()[0].entry_hash);
    EXPECT_EQ(c.entries()[1].entry_hash, oracle_hash(c.entries()[1]));
    EXPECT_EQ(c.tip_hash(), c.entries()[1].entry_hash);
}

TEST(Chain, FrozenGenesisHash)
{
    HashChain c;
    c.append("ada", Action::DeployWill, "will-0001", as_view("deploy"), 1700000000000);
    EXPECT_EQ(to_hex(c.entries()[0].entry_hash), to_hex(oracle_hash(c.entries()[0])));
}

TEST(Chain, AppendAfterTamperThrows)
{
    auto c = chain_of(3);
    c.mutable_entries()[0].actor = "mallory";
    try {
        c.append("a", Action::Warn, "w", {}, 0);
        FAIL();
    } catch (const ChainCorrupt& e) {
        EXPECT_EQ(e.seq(), 0u);
    }
}

TEST(Chain, UntouchedHundredVerifies)
{
    EXPECT_TRUE(chain_of(100).verify().ok());
}

TEST(Chain, DigestBitFlipAt50)
{
    auto c = chain_of(100);
    c.mutable_entries()[50].payload_digest[7] ^= 0x10;
    EXPECT_EQ(c.verify().first_bad, 50u);
}

TEST(Chain, ReorderDetectedAtSwapPoint)
{
    auto c = chain_of(100);
    std::swap(c.mutable_entries()[10], c.mutable_entries()[11]);
    EXPECT_EQ(c.verify().first_bad, 10u);
}

TEST(Chain, TruncatedTailStillVerifiesButDroppedHeadDoesNot)
{
    auto c = chain_of(10);
    auto& v = c.mutable_entries();
    v.erase(v.begin());
    EXPECT_EQ(c.verify().first_bad, 0u);
}

TEST(Chain, TextRoundTrip)
{
    HashChain c;
    c.append("tab\there", Action::Warn, "new\nline%", as_view("p"), 42);
    c.append("plain", Action::Activate, "w", as_view("q"), 43);
    auto text = c.to_text();
    EXPECT_EQ(text.rfind("DWCHAIN1\n", 0), 0u);
    auto back = HashChain::from_text(text);
    EXPECT_EQ(back.entries(), c.entries());
    EXPECT_TRUE(back.verify().ok());
}

TEST(Chain, FileRoundTrip)
{
    auto c = chain_of(20);
    auto path = (std::filesystem::temp_directory_path() / "dw_chain_test.log").string();
    c.save(path);
    auto back = HashChain::load(path);
    EXPECT_EQ(back.entries(), c.entries());
    std::filesystem::remove(path);
}

TEST(Chain, EverySingleBitFlipOfPersistedChainIsDetected)
{
    HashChain c;
    c.append("ada", Action::DeployWill, "will%1", as_view("a"), 10);
    c.append("bob", Action::VoteCast, "will%1", as_view("b"), 20);
    c.append("broker", Action::Activate, "will%1", as_view("c"), 30);
    const auto text = c.to_text();
    std::size_t flips = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        for (int bit = 0; bit < 8; ++bit) {
            auto mutated = text;
            mutated[i] = static_cast<char>(mutated[i] ^ (1 << bit));
            bool detected = false;
            try {
                detected = !HashChain::from_text(mutated).verify().ok();
            } catch (const DecodeError&) {
                detected = true;
            }
            ASSERT_TRUE(detected) << "byte " << i << " bit " << bit;
            ++flips;
        }
    }
    EXPECT_EQ(flips, text.size() * 8);
}

TEST(Chain, RejectsMalformedText)
{
    EXPECT_THROW(HashChain::from_text(""), DecodeError);
    EXPECT_THROW(HashChain::from_text("DWCHAIN2\n"), DecodeError);
    EXPECT_THROW(HashChain::from_text("DWCHAIN1\n0\t1\tDeployWill\n"), DecodeError);
    EXPECT_TRUE(HashChain::from_text("DWCHAIN1\n").empty());
}

TEST(Chain, ActionNames)
{
    for (int i = 1; i <= 15; ++i) {
        auto a = static_cast<Action>(i);
        EXPECT_EQ(action_from_string(to_string(a)), a);
    }
    EXPECT_FALSE(action_from_string("activate"));
}

TEST(Inspector, CompliantTraceHasNoFindings)
{
    auto t = compliant();
    EXPECT_TRUE(inspect(t.chain.entries(), kParams).empty());
}

TEST(Inspector, PullDataBeforeActivateIsR3)
{
    Trace t;
    t.add(Action::DeployWill).add(Action::PullData);
    auto f = inspect(t.chain.entries(), kParams);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0].rule, "R3");
    EXPECT_EQ(f[0].seq, 1u);
    EXPECT_EQ(f[0].severity, Severity::Halt);
}

TEST(Inspector, EarlyActivateIsR2)
{
    Trace t;
    t.add(Action::DeployWill).add(Action::TriggerRequest).add(Action::VoteCast, "bob").add(Action::VoteCast, "cy");
    t.add(Action::FreezeStart).at(t.now + 1000).add(Action::Activate);
    auto f = inspect(t.chain.entries(), kParams);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0].rule, "R2");
    EXPECT_EQ(f[0].seq, 5u);
}

TEST(Inspector, MissingFreezeIsR2)
{
    Trace t;
    t.add(Action::DeployWill).add(Action::VoteCast, "bob").add(Action::VoteCast, "cy").add(Action::Activate);
    auto f = inspect(t.chain.entries(), kParams);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0].rule, "R2");
}

TEST(Inspector, TooFewVotesIsR1AndRepeatVotesCountOnce)
{
    Trace t;
    t.add(Action::DeployWill).add(Action::TriggerRequest).add(Action::VoteCast, "bob").add(Action::VoteCast, "bob");
    t.add(Action::FreezeStart).at(t.now + 3'600'000).add(Action::Activate);
    auto f = inspect(t.chain.entries(), kParams);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0].rule, "R1");
}

TEST(Inspector, OverrideSatisfiesR1AndR2)
{
    Trace t;
    t.add(Action::DeployWill).add(Action::TriggerRequest).add(Action::AuthorityOverride, "registry");
    t.add(Action::Activate).add(Action::PullData);
    EXPECT_TRUE(inspect(t.chain.entries(), kParams).empty());
}

TEST(Inspector, VetoInFreezeForbidsActivate)
{
    Trace t;
    t.add(Action::DeployWill).add(Action::TriggerRequest).add(Action::VoteCast, "bob").add(Action::VoteCast, "cy");
    t.add(Action::FreezeStart).add(Action::Veto, "ada").at(t.now + 3'600'000).add(Action::Activate);
    auto f = inspect(t.chain.entries(), kParams);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0].rule, "R4");
}

TEST(Inspector, NewRoundAfterVetoIsClean)
{
    Trace t;
    t.add(Action::DeployWill).add(Action::TriggerRequest).add(Action::VoteCast, "bob").add(Action::VoteCast, "cy");
    t.add(Action::FreezeStart).add(Action::Veto, "ada");
    t.add(Action::TriggerRequest, "bob").add(Action::VoteCast, "bob").add(Action::VoteCast, "cy").add(Action::FreezeStart);
    t.at(t.now + 3'600'000).add(Action::Activate);
    EXPECT_TRUE(inspect(t.chain.entries(), kParams).empty());
}

TEST(Inspector, WillsAreIndependent)
{
    HashChain c;
    c.append("b", Action::Activate, "other", {}, 0);
    c.append("b", Action::PullData, "w", {}, 0);
    auto f = inspect(c.entries(), {{"other", {1, 0}}});
    // R1 and R2 for "other", R3 for "w"
    ASSERT_EQ(f.size(), 3u);
    EXPECT_EQ(f[2].rule, "R3");
    EXPECT_EQ(f[2].seq, 1u);
}

TEST(Inspector, TamperedChainYieldsR0)
{
    auto t = compliant();
    t.chain.mutable_entries()[3].timestamp += 1;
    auto f = inspect(t.chain.entries(), kParams);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0].rule, "R0");
    EXPECT_EQ(f[0].seq, 3u);
}

TEST(Inspector, Deterministic)
{
    Trace t;
    t.add(Action::PullData).add(Action::Activate).add(Action::KeyDistribute);
    EXPECT_EQ(inspect(t.chain.entries(), kParams), inspect(t.chain.entries(), kParams));
}

TEST(Inspector, CustomRuleSet)
{
    Trace t;
    t.add(Action::PullData);
    std::vector<Rule> only_r1 = {default_rules()[0]};
    EXPECT_TRUE(inspect(t.chain.entries(), kParams, only_r1).empty());
}
