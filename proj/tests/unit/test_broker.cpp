#include <gtest/gtest.h>

#include <filesystem>

#include "dw/broker/broker.hpp"
#include "dw/policy/policy.hpp"
#include "support/broker_world.hpp"
#include "support/model_check.hpp"

using namespace dw;
using namespace dw::broker;
using dw::testgen::BrokerWorld;

namespace {

ledger::Action last_action(const Broker& b)
{
    return b.ledger().entries().back().action;
}

std::set<std::string> oracle_assets(const willfile::DigitalWill& w, const std::map<std::string, Bytes>& assets,
                                    const policy::AttributeSet& attrs)
{
    std::set<std::string> out;
    for (const auto& [id, doc] : assets) {
        const auto* cp = w.policy_for(id);
        if (cp && policy::evaluate(policy::parse_policy(cp->policy), attrs)) out.insert(id);
    }
    return out;
}

template <class M>
std::set<std::string> keys(const M& m)
{
    std::set<std::string> out;
    for (const auto& [k, v] : m) out.insert(k);
    return out;
}

} // namespace

// ---- state machine ----

TEST(Lifecycle, ThresholdTwoOfThree)
{
    WillStateMachine m({"a", "b", "c"}, 2, 100, true);
    EXPECT_TRUE(m.request_trigger("a"));
    EXPECT_FALSE(m.vote("a", 0).froze);
    auto r = m.vote("b", 5);
    EXPECT_TRUE(r.froze);
    EXPECT_EQ(m.state(), WillState::Frozen);
    EXPECT_EQ(m.freeze_deadline(), 105);
}

TEST(Lifecycle, DuplicateVoteCountsOnce)
{
    WillStateMachine m({"a", "b", "c"}, 2, 100, true);
    m.vote("a", 0);
    EXPECT_TRUE(m.vote("a", 0).duplicate);
    EXPECT_EQ(m.votes().size(), 1u);
    EXPECT_EQ(m.state(), WillState::VotingOpen);
}

TEST(Lifecycle, IllegalTransitions)
{
    WillStateMachine m({"a"}, 1, 10, true);
    EXPECT_THROW(m.veto(0), IllegalState);
    EXPECT_THROW(m.mark_executed(), IllegalState);
    EXPECT_THROW(m.override_activate(), IllegalState); // Deployed
    EXPECT_THROW(m.vote("z", 0), NotAnHeir);
    m.vote("a", 0);
    EXPECT_THROW(m.update({"a"}, 1, 10, true), IllegalState);
    EXPECT_THROW(m.remove(), IllegalState);
    EXPECT_THROW(m.veto(10), FreezeExpired);
    EXPECT_TRUE(m.tick(10));
    m.mark_executed();
    EXPECT_THROW(m.vote("a", 11), IllegalState);
    EXPECT_THROW(m.override_activate(), IllegalState);
}

TEST(Lifecycle, OverrideCanBeDisabled)
{
    WillStateMachine m({"a", "b"}, 2, 10, false);
    m.request_trigger("a");
    EXPECT_THROW(m.override_activate(), IllegalState);
}

TEST(Lifecycle, ExhaustiveModelCheck)
{
    auto r = testgen::model_check_lifecycle(8, 2, 2);
    for (const auto& v : r.violations) ADD_FAILURE() << v;
    EXPECT_GT(r.executed_reached, 0u);
    EXPECT_GT(r.veto_checks, 0u);
    RecordProperty("states", static_cast<int>(r.states));
}

// ---- storage ----

TEST(Storage, MemoryRoundTripAndFaults)
{
    MemoryProvider p("m");
    p.put("f", 1, as_view("abc"));
    EXPECT_EQ(p.get("f", 1), to_bytes("abc"));
    p.set_faults({.corrupting = true});
    EXPECT_NE(p.get("f", 1), to_bytes("abc"));
    p.set_faults({.unavailable = true});
    EXPECT_THROW(p.get("f", 1), StorageFailure);
    EXPECT_THROW(p.put("f", 2, as_view("x")), StorageFailure);
    p.set_faults({.latency_ms = 9000});
    p.get("f", 1);
    EXPECT_EQ(p.last_latency_ms(), 9000);
    EXPECT_EQ(p.stats().gets, 4u);
    EXPECT_EQ(p.stats().failures, 2u);
}

TEST(Storage, DirectoryLayout)
{
    auto root = std::filesystem::temp_directory_path() / "dw_storage_test";
    std::filesystem::remove_all(root);
    DirectoryProvider p(root, "loc-a");
    p.put("will-1:social", 3, as_view("share bytes"));
    EXPECT_TRUE(std::filesystem::exists(root / "loc-a" / "will-1%3Asocial.3.share"));
    EXPECT_EQ(p.get("will-1:social", 3), to_bytes("share bytes"));
    auto l = p.list();
    ASSERT_EQ(l.size(), 1u);
    EXPECT_EQ(l[0], (std::pair<std::string, std::uint16_t>{"will-1:social", 3}));
    EXPECT_THROW(p.get("missing", 1), StorageFailure);
    std::filesystem::remove_all(root);
}

// ---- adapters ----

TEST(Adapters, FixturesAreDeterministic)
{
    auto a = load_fixture_dir(DW_REPO_DATA "/adapters");
    auto b = load_fixture_dir(DW_REPO_DATA "/adapters");
    ASSERT_EQ(keys(a), (std::set<std::string>{"cloud", "email", "social"}));
    for (const auto& [id, ad] : a) EXPECT_EQ(ad->assets(), b[id]->assets());
    EXPECT_EQ(a["social"]->assets().size(), 6u);
    EXPECT_EQ(a["cloud"]->fetch("PLACEHOLDER-cloud-0001").size(), 6u);
    EXPECT_THROW(a["cloud"]->fetch("wrong"), AdapterFailure);
    a["cloud"]->set_failing(true);
    EXPECT_THROW(a["cloud"]->fetch("PLACEHOLDER-cloud-0001"), AdapterFailure);
}

// ---- broker ----

TEST(Broker, DeployAppendsLedgerEntry)
{
    BrokerWorld w;
    EXPECT_EQ(w.broker->deploy(w.will), "will-e2e");
    EXPECT_EQ(w.broker->state("will-e2e"), WillState::Deployed);
    EXPECT_EQ(w.broker->ledger().size(), 1u);
    EXPECT_EQ(last_action(*w.broker), ledger::Action::DeployWill);
    EXPECT_EQ(w.broker->ledger().entries()[0].payload_digest, crypto::sha256(willfile::serialize_xml(w.will)));
}

TEST(Broker, DeployRejectsInvalidWill)
{
    BrokerWorld w;
    auto bad = w.will;
    bad.trigger.vote_threshold = 3;
    EXPECT_THROW(w.broker->deploy(bad), ValidationError);
    bad = w.will;
    bad.heirs[0].public_key = "00";
    EXPECT_THROW(w.broker->deploy(bad), ValidationError);
    w.broker->deploy(w.will);
    EXPECT_THROW(w.broker->deploy(w.will), ValidationError);
    EXPECT_EQ(last_action(*w.broker), ledger::Action::Warn);
}

TEST(Broker, UpdateAndDelete)
{
    BrokerWorld w;
    w.broker->deploy(w.will);
    auto v2 = w.will;
    v2.trigger.freeze_seconds = 10;
    EXPECT_EQ(w.broker->update_will("will-e2e", v2), 2u);
    EXPECT_EQ(w.broker->record("will-e2e").will.trigger.freeze_seconds, 10u);
    EXPECT_THROW(w.broker->delete_will("will-e2e", "bob"), AuthError);
    EXPECT_EQ(w.broker->delete_will("will-e2e", "ada"), WillState::Cancelled);
    EXPECT_THROW(w.broker->vote("will-e2e", "bob"), IllegalState);
    EXPECT_THROW(w.broker->vote("nope", "bob"), UnknownWill);
}

TEST(Broker, UpdateInVotingOpenIsIllegal)
{
    BrokerWorld w;
    w.broker->deploy(w.will);
    w.broker->request_trigger("will-e2e", "bob");
    EXPECT_THROW(w.broker->update_will("will-e2e", w.will), IllegalState);
}

TEST(Broker, VotesFreezeAndDuplicate)
{
    BrokerWorld w;
    w.broker->deploy(w.will);
    EXPECT_EQ(w.broker->vote("will-e2e", "bob"), WillState::VotingOpen);
    auto before = w.broker->ledger().size();
    EXPECT_EQ(w.broker->vote("will-e2e", "bob"), WillState::VotingOpen);
    EXPECT_EQ(w.broker->ledger().size(), before + 1);
    EXPECT_EQ(last_action(*w.broker), ledger::Action::Warn);
    EXPECT_EQ(w.broker->record("will-e2e").machine.votes().size(), 1u);
    EXPECT_THROW(w.broker->vote("will-e2e", "mallory"), NotAnHeir);
    EXPECT_EQ(w.broker->vote("will-e2e", "cy"), WillState::Frozen);
    EXPECT_EQ(last_action(*w.broker), ledger::Action::FreezeStart);
}

TEST(Broker, VetoRules)
{
    BrokerWorld w;
    w.activate();
    EXPECT_THROW(w.broker->veto("will-e2e", "ada"), IllegalState); // already Activated

    BrokerWorld v(2);
    v.broker->deploy(v.will);
    v.broker->vote("will-e2e", "bob");
    v.broker->vote("will-e2e", "cy");
    EXPECT_THROW(v.broker->veto("will-e2e", "bob"), AuthError);
    v.clock.advance_ms(1000);
    EXPECT_EQ(v.broker->veto("will-e2e", "ada"), WillState::Cancelled);

    BrokerWorld x(3);
    x.broker->deploy(x.will);
    x.broker->vote("will-e2e", "bob");
    x.broker->vote("will-e2e", "cy");
    x.clock.advance_ms(3'600'000);
    EXPECT_THROW(x.broker->veto("will-e2e", "ada"), FreezeExpired);
}

TEST(Broker, AuthorityOverride)
{
    BrokerWorld w;
    w.broker->deploy(w.will);
    w.broker->request_trigger("will-e2e", "cy");
    EXPECT_THROW(w.broker->authority_override("will-e2e", as_view("garbage")), BadAttestation);
    auto att = make_attestation(w.authority_sk, "will-e2e");
    auto other = make_attestation(w.authority_sk, "will-other");
    EXPECT_THROW(w.broker->authority_override("will-e2e", other), BadAttestation);
    EXPECT_EQ(w.broker->authority_override("will-e2e", att), WillState::Activated);
    EXPECT_EQ(w.broker->record("will-e2e").machine.votes().size(), 0u);
    w.broker->execute("will-e2e");
    EXPECT_THROW(w.broker->authority_override("will-e2e", att), IllegalState);
    EXPECT_TRUE(ledger::inspect(w.broker->ledger().entries(), w.broker->inspector_params()).empty());
}

TEST(Broker, TickActivatesOnlyExpired)
{
    BrokerWorld w;
    auto second = w.will;
    second.will_id = "will-two";
    second.trigger.freeze_seconds = 7200;
    w.broker->deploy(w.will);
    w.broker->deploy(second);
    for (const auto* id : {"will-e2e", "will-two"}) {
        w.broker->vote(id, "bob");
        w.broker->vote(id, "cy");
    }
    w.clock.advance_ms(1000);
    EXPECT_TRUE(w.broker->tick().empty());
    w.clock.advance_ms(3'600'000);
    auto changes = w.broker->tick();
    ASSERT_EQ(changes.size(), 1u);
    EXPECT_EQ(changes[0], (StateChange{"will-e2e", WillState::Frozen, WillState::Activated}));
    EXPECT_EQ(w.broker->state("will-two"), WillState::Frozen);
}

TEST(Broker, ExecuteOnDeployedIsIllegal)
{
    BrokerWorld w;
    w.broker->deploy(w.will);
    EXPECT_THROW(w.broker->execute("will-e2e"), IllegalState);
}

TEST(Broker, ExecutePipelineCounts)
{
    BrokerWorld w;
    w.activate();
    auto rep = w.broker->execute("will-e2e");
    EXPECT_EQ(rep.ciphertexts(), 3u);
    EXPECT_EQ(rep.shares(), 12u);
    EXPECT_EQ(rep.envelopes, 2u);
    EXPECT_TRUE(rep.platforms_failed.empty());
    EXPECT_EQ(w.broker->state("will-e2e"), WillState::Executed);
    for (const auto& p : w.providers) EXPECT_EQ(p->stats().puts, 3u);
    auto j = rep.to_json();
    EXPECT_NE(j.find("\"ciphertexts\": 3"), std::string::npos);
    EXPECT_TRUE(ledger::inspect(w.broker->ledger().entries(), w.broker->inspector_params()).empty());
}

TEST(Broker, ProviderDownStillPlacesThreshold)
{
    BrokerWorld w;
    w.providers[1]->set_faults({.unavailable = true});
    w.activate();
    auto rep = w.broker->execute("will-e2e");
    EXPECT_EQ(rep.shares(), 9u);
    for (const auto& f : rep.files) EXPECT_GE(f.shares_placed, 2u);
    EXPECT_FALSE(rep.warnings.empty());
    std::size_t warns = 0;
    for (const auto& e : w.broker->ledger().entries()) warns += e.action == ledger::Action::Warn;
    EXPECT_GE(warns, 3u);
}

TEST(Broker, SpareProviderTakesFailedShare)
{
    BrokerWorld w(1, 5); // loc-5 is not named in the will
    w.providers[0]->set_faults({.unavailable = true});
    w.activate();
    auto rep = w.broker->execute("will-e2e");
    EXPECT_EQ(rep.shares(), 12u);
    EXPECT_EQ(w.providers[4]->stats().puts, 3u);
}

TEST(Broker, TooFewProvidersAborts)
{
    BrokerWorld w;
    for (int i = 0; i < 3; ++i) w.providers[i]->set_faults({.unavailable = true});
    w.activate();
    EXPECT_THROW(w.broker->execute("will-e2e"), StorageFailure);
    EXPECT_EQ(w.broker->state("will-e2e"), WillState::Activated);
}

TEST(Broker, AdapterFailureIsPartial)
{
    BrokerWorld w;
    w.adapters[0]->set_failing(true); // cloud
    w.activate();
    auto rep = w.broker->execute("will-e2e");
    EXPECT_EQ(rep.platforms_failed, std::vector<std::string>{"cloud"});
    EXPECT_EQ(rep.ciphertexts(), 2u);
}

TEST(Broker, RetrieveHealthyUsesExactlyThreshold)
{
    BrokerWorld w;
    w.activate();
    w.broker->execute("will-e2e");
    w.reset_provider_stats();
    auto rep = w.broker->retrieve("will-e2e", "bob", w.bob.sk);
    for (const auto& f : rep.files) EXPECT_EQ(f.requests, 2u);
    EXPECT_EQ(w.total_gets(), 6u);
    EXPECT_EQ(last_action(*w.broker), ledger::Action::RetrieveShares);
}

TEST(Broker, RetrieveEscalatesPastFaults)
{
    for (int mode = 0; mode < 3; ++mode) {
        BrokerWorld w;
        w.activate();
        w.broker->execute("will-e2e");
        Faults f;
        if (mode == 0) f.unavailable = true;
        if (mode == 1) f.corrupting = true;
        if (mode == 2) f.latency_ms = 60'000;
        w.providers[0]->set_faults(f);
        auto rep = w.broker->retrieve("will-e2e", "bob", w.bob.sk);
        for (const auto& fr : rep.files) {
            EXPECT_LE(fr.requests, 3u);
            EXPECT_EQ(fr.failed_locations, std::vector<std::string>{"loc-1"});
        }
        EXPECT_EQ(rep.recovered(), w.adapter_bytes()) << "mode " << mode;
    }
}

TEST(Broker, RetrieveFailsWhenExhausted)
{
    BrokerWorld w;
    w.activate();
    w.broker->execute("will-e2e");
    for (int i = 0; i < 3; ++i) w.providers[i]->set_faults({.unavailable = true});
    EXPECT_THROW(w.broker->retrieve("will-e2e", "bob", w.bob.sk), sharding::ThresholdNotMet);
}

TEST(Broker, RetrieveWithWrongKeyIsAuthError)
{
    BrokerWorld w;
    w.activate();
    w.broker->execute("will-e2e");
    EXPECT_THROW(w.broker->retrieve("will-e2e", "bob", w.cy.sk), AuthError);
    EXPECT_THROW(w.broker->retrieve("will-e2e", "zed", w.cy.sk), NotAnHeir);
}

TEST(Broker, EndToEndFidelityAndIsolation)
{
    BrokerWorld w;
    w.activate();
    w.broker->execute("will-e2e");
    auto all = w.adapter_bytes();

    auto bob = w.broker->retrieve("will-e2e", "bob", w.bob.sk);
    EXPECT_EQ(bob.recovered(), all);
    EXPECT_TRUE(bob.denied().empty());

    auto cy = w.broker->retrieve("will-e2e", "cy", w.cy.sk);
    auto expect = oracle_assets(w.will, all, {"Friend"});
    EXPECT_EQ(keys(cy.recovered()), expect);
    EXPECT_EQ(expect.size(), 5u); // 4 posts + 1 sent mail
    for (const auto& id : expect) EXPECT_EQ(cy.recovered().at(id), all.at(id));
    EXPECT_EQ(cy.denied().size(), all.size() - expect.size());
    EXPECT_TRUE(ledger::inspect(w.broker->ledger().entries(), w.broker->inspector_params()).empty());
}

TEST(Broker, HeirSatisfyingNothingIsDeniedEverything)
{
    BrokerWorld w;
    w.will.heirs[1].attributes = {"Stranger"};
    w.activate();
    w.broker->execute("will-e2e");
    auto rep = w.broker->retrieve("will-e2e", "cy", w.cy.sk);
    EXPECT_TRUE(rep.recovered().empty());
    EXPECT_EQ(rep.denied().size(), w.adapter_bytes().size());
}

TEST(Broker, RedeployedExportBehavesIdentically)
{
    BrokerWorld a(10), b(20);
    a.broker->deploy(a.will);
    auto xml = a.broker->export_state().wills.at("will-e2e");
    auto reparsed = willfile::parse_xml(xml);
    b.broker->deploy(reparsed);
    for (auto* w : {&a, &b}) {
        EXPECT_EQ(w->broker->vote("will-e2e", "bob"), WillState::VotingOpen);
        EXPECT_EQ(w->broker->vote("will-e2e", "cy"), WillState::Frozen);
        w->clock.advance_ms(3'599'999);
        EXPECT_TRUE(w->broker->tick().empty());
        w->clock.advance_ms(1);
        EXPECT_EQ(w->broker->tick().size(), 1u);
    }
    EXPECT_EQ(a.broker->record("will-e2e").machine, b.broker->record("will-e2e").machine);
}

TEST(Broker, ExportBundle)
{
    BrokerWorld w;
    w.activate();
    w.broker->execute("will-e2e");
    auto b = w.broker->export_state();
    EXPECT_NO_THROW(pdcpabe::deserialize_public_params(b.public_params));
    EXPECT_NO_THROW(pdcpabe::deserialize_master_key(b.master_key));
    EXPECT_TRUE(ledger::HashChain::from_text(b.ledger_text).verify().ok());
    EXPECT_NE(b.manifest_json.find("loc-4"), std::string::npos);
}

TEST(Broker, EveryOperationLogs)
{
    BrokerWorld w;
    auto n = [&] { return w.broker->ledger().size(); };
    std::size_t before = n();
    w.broker->deploy(w.will);
    EXPECT_GT(n(), before);
    before = n();
    w.broker->request_trigger("will-e2e", "bob");
    EXPECT_GT(n(), before);
    before = n();
    w.broker->request_trigger("will-e2e", "bob");
    EXPECT_GT(n(), before);
    before = n();
    EXPECT_THROW(w.broker->execute("will-e2e"), IllegalState);
    EXPECT_GT(n(), before);
}
