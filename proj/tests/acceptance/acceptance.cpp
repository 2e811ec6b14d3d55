// Acceptance gate: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset. Exit status is nonzero if any line fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "dw/bsw07/bsw07.hpp"
#include "dw/cli/bench.hpp"
#include "dw/ledger/inspector.hpp"
#include "dw/pdcpabe/scheme.hpp"
#include "dw/sharding/shamir.hpp"
#include "support/broker_world.hpp"
#include "support/model_check.hpp"
#include "support/random_policy.hpp"
#include "support/random_will.hpp"

using namespace dw;
using policy::AttributeSet;
using policy::PolicyExpr;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

Bytes payload(RandomSource& rng, std::size_t n) { return rng.bytes(n); }

std::set<std::string> recovered_ids(const pdcpabe::DecryptionReport& r)
{
    std::set<std::string> out;
    for (const auto& [id, data] : r.recovered) out.insert(id);
    return out;
}

// 1. access oracle equivalence
Outcome access_oracle()
{
    SeededRandom rng(1001);
    auto [pp, mk] = pdcpabe::setup(128, rng);
    auto [bpp, bmk] = bsw07::setup(rng);
    constexpr std::size_t kUniverse = 6;
    std::size_t mismatches = 0, bsw_checks = 0, bsw_mismatches = 0, recovered = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        auto n = 1 + rng.uniform(4);
        std::vector<pdcpabe::PlainItem> items;
        for (std::size_t i = 0; i < n; ++i) {
            items.push_back({"p" + std::to_string(i), payload(rng, 1 + rng.uniform(64)),
                             testgen::random_policy(rng, kUniverse, 3)});
        }
        auto attrs = testgen::random_attrs(rng, kUniverse);
        if (attrs.empty()) attrs.insert(testgen::attr_name(0));
        auto ct = pdcpabe::encrypt(pp, items, rng);
        auto rep = pdcpabe::decrypt(pp, pdcpabe::keygen(mk, pp, attrs, rng), ct);
        std::set<std::string> expect;
        for (const auto& it : items) {
            if (policy::evaluate(it.policy, attrs)) expect.insert(it.payload_id);
        }
        bool ok = recovered_ids(rep) == expect;
        for (const auto& it : items) {
            auto got = rep.recovered.find(it.payload_id);
            if (got != rep.recovered.end() && got->second != it.data) ok = false;
        }
        mismatches += !ok;
        recovered += expect.size();

        // bsw07 on each single policy of the trial
        auto bkey = bsw07::keygen(bpp, bmk, attrs, rng);
        for (const auto& it : items) {
            auto bct = bsw07::encrypt(bpp, it.data, it.policy, rng);
            auto out = bsw07::decrypt(bpp, bkey, bct);
            bool want = policy::evaluate(it.policy, attrs);
            ++bsw_checks;
            if (out.has_value() != want || (out && *out != it.data)) ++bsw_mismatches;
        }
    }
    return {mismatches == 0 && bsw_mismatches == 0,
            "1000 trials, " + std::to_string(recovered) + " payloads recovered, pdcpabe mismatches " +
                std::to_string(mismatches) + ", bsw07 " + std::to_string(bsw_mismatches) + "/" +
                std::to_string(bsw_checks)};
}

// 2. partial decryption
Outcome partial_decryption()
{
    SeededRandom rng(1002);
    auto [pp, mk] = pdcpabe::setup(128, rng);
    const std::vector<std::string> policies = {"(Son and Family)", "(Friend or Colleague)",
                                               "(Executor and (Son or Daughter))", "Lawyer"};
    std::vector<pdcpabe::PlainItem> items;
    for (int i = 0; i < 10; ++i) {
        items.push_back({"file" + std::to_string(i), payload(rng, 200), policy::parse_policy(policies[i % 4])});
    }
    auto ct = pdcpabe::encrypt(pp, items, rng);
    const std::vector<AttributeSet> keys = {
        {"Son", "Family"}, {"Friend"}, {"Executor", "Daughter", "Lawyer"}, {"Son", "Family", "Executor", "Friend"}};
    std::ostringstream d;
    d << ct.data_nodes.size() << " policy groups;";
    bool ok = ct.data_nodes.size() == 4;
    for (const auto& attrs : keys) {
        auto rep = pdcpabe::decrypt(pp, pdcpabe::keygen(mk, pp, attrs, rng), ct);
        std::set<std::string> expect;
        for (const auto& it : items) {
            if (policy::evaluate(it.policy, attrs)) expect.insert(it.payload_id);
        }
        ok = ok && recovered_ids(rep) == expect && rep.denied.size() == items.size() - expect.size();
        for (const auto& it : items) {
            if (rep.recovered.count(it.payload_id)) ok = ok && rep.recovered.at(it.payload_id) == it.data;
        }
        d << " " << expect.size() << "/10";
    }
    return {ok, d.str() + " recovered, each equal to the oracle subset"};
}

// 3. collusion resistance
Outcome collusion()
{
    SeededRandom rng(1003);
    auto [pp, mk] = pdcpabe::setup(128, rng);
    auto ct = pdcpabe::encrypt(pp, {{"m", payload(rng, 64), policy::parse_policy("(A and B)")}}, rng);
    auto k1 = pdcpabe::keygen(mk, pp, {"A"}, rng);
    auto k2 = pdcpabe::keygen(mk, pp, {"B"}, rng);
    bool ok = pdcpabe::decrypt(pp, k1, ct).recovered.empty() && pdcpabe::decrypt(pp, k2, ct).recovered.empty();
    std::size_t merged_opened = 0;
    for (const auto* base : {&k1, &k2}) {
        auto merged = *base;
        merged.attrs = {"A", "B"};
        merged.components["A"] = k1.components.at("A");
        merged.components["B"] = k2.components.at("B");
        merged_opened += pdcpabe::decrypt(pp, merged, ct).recovered.size();
    }
    ok = ok && merged_opened == 0;
    return {ok, "K1 and K2 denied alone; merged keys opened " + std::to_string(merged_opened) + " payloads"};
}

// Distinct sub-expressions up to commutativity, computed from the trees.
std::size_t census(const std::vector<PolicyExpr>& trees)
{
    std::set<std::string> seen;
    std::function<std::string(const PolicyExpr&)> nf = [&](const PolicyExpr& x) -> std::string {
        std::string s;
        if (x.is_attr()) {
            s = "'" + x.attribute() + "'";
        } else {
            auto l = nf(x.left());
            auto r = nf(x.right());
            if (r < l) std::swap(l, r);
            s = std::string(x.kind() == PolicyExpr::Kind::And ? "&" : "|") + "{" + l + ";" + r + "}";
        }
        seen.insert(s);
        return s;
    };
    for (const auto& t : trees) nf(t);
    return seen.size();
}

// 4. node sharing on the subset example
Outcome node_sharing()
{
    SeededRandom rng(1004);
    auto f1 = policy::parse_policy("(A and B)");
    auto f2 = policy::parse_policy("((A and B) or C)");
    auto oracle_nodes = census({f1, f2});
    auto standalone_nodes = f1.node_count() + f2.node_count();

    auto [pp, mk] = pdcpabe::setup(128, rng);
    auto ct = pdcpabe::encrypt(pp, {{"F1", payload(rng, 32), f1}, {"F2", payload(rng, 32), f2}}, rng);
    auto dag_nodes = policy::structure_node_count(ct.dag);
    auto pd_pairs = ct.attribute_pair_count();

    auto [bpp, bmk] = bsw07::setup(rng);
    auto b1 = bsw07::encrypt(bpp, payload(rng, 32), f1, rng);
    auto b2 = bsw07::encrypt(bpp, payload(rng, 32), f2, rng);
    auto bsw_pairs = b1.leaves.size() + b2.leaves.size();

    bool nodes_ok = dag_nodes == oracle_nodes && dag_nodes < standalone_nodes;
    bool pairs_ok = pd_pairs < bsw_pairs;
    return {nodes_ok && pairs_ok, "nodes " + std::to_string(dag_nodes) + " (census " + std::to_string(oracle_nodes) +
                                      ") vs " + std::to_string(standalone_nodes) + " standalone; attribute pairs " +
                                      std::to_string(pd_pairs) + " vs " + std::to_string(bsw_pairs) + " standalone" +
                                      (pairs_ok ? "" : ", not fewer: the OR parent cannot reuse the shared AND")};
}

// 5. scaling trend
Outcome scaling_trend()
{
    cli::BenchConfig cfg;
    cfg.atom_counts = {50, 100, 200, 400};
    cfg.sharing_factor = 50;
    cfg.repetitions = 5;
    cfg.keygen_sizes = {30};
    cfg.seed = 1005;
    auto res = cli::run_bench(cfg);
    auto ratio = [&](const char* scheme, const char* op) {
        return res.find(scheme, op, 400)->avg_s / res.find(scheme, op, 100)->avg_s;
    };
    double pe = ratio("pdcpabe", "encrypt"), be = ratio("bsw07", "encrypt");
    double pd = ratio("pdcpabe", "decrypt"), bd = ratio("bsw07", "decrypt");
    bool ok = pe <= 1.5 && be >= 2.5 && pd <= 1.5 && bd >= 2.5;
    return {ok, "400/100 mean ratios: pdcpabe encrypt " + fmt(pe) + ", bsw07 encrypt " + fmt(be) +
                    ", pdcpabe decrypt " + fmt(pd) + ", bsw07 decrypt " + fmt(bd)};
}

// 6. Shamir round trip
Outcome shamir()
{
    SeededRandom rng(1006);
    std::size_t subsets = 0, short_subsets = 0, bad = 0;
    const unsigned ns[] = {3, 5, 10};
    for (int c = 0; c < 200; ++c) {
        // log-uniform size over 1 B .. 1 MiB
        std::size_t size = std::size_t{1} << rng.uniform(21);
        size = std::min<std::size_t>(size + rng.uniform(size), 1 << 20);
        if (c == 0) size = 1;
        if (c == 1) size = 1 << 20;
        auto data = rng.bytes(size);
        unsigned n = ns[c % 3];
        unsigned t = sharding::default_threshold(n);
        auto shares = sharding::split("case" + std::to_string(c), data, n, t, rng);
        for (int k = 0; k < 3; ++k) {
            std::vector<sharding::Share> pick = shares;
            for (std::size_t i = pick.size(); i > 1; --i) std::swap(pick[i - 1], pick[rng.uniform(i)]);
            pick.resize(t);
            ++subsets;
            if (sharding::combine(pick) != data) ++bad;
            pick.pop_back();
            ++short_subsets;
            try {
                sharding::combine(pick);
                ++bad;
            } catch (const sharding::ThresholdNotMet&) {
            }
        }
    }
    return {bad == 0, "200 cases, " + std::to_string(subsets) + " T-subsets and " + std::to_string(short_subsets) +
                          " (T-1)-subsets, " + std::to_string(bad) + " wrong"};
}

// 7. retrieval economy
Outcome retrieval_economy()
{
    testgen::BrokerWorld w(1007);
    w.activate();
    w.broker->execute("will-e2e");
    const unsigned t = w.will.storage.threshold;
    auto all = w.adapter_bytes();

    w.reset_provider_stats();
    auto healthy = w.broker->retrieve("will-e2e", "bob", w.bob.sk);
    bool ok = healthy.recovered() == all;
    unsigned worst_healthy = 0;
    for (const auto& f : healthy.files) {
        ok = ok && f.requests == t;
        worst_healthy = std::max(worst_healthy, f.requests);
    }
    ok = ok && w.total_gets() == t * healthy.files.size();

    unsigned worst_faulted = 0;
    for (auto& p : w.providers) {
        p->set_faults({.unavailable = true});
        auto rep = w.broker->retrieve("will-e2e", "bob", w.bob.sk);
        ok = ok && rep.recovered() == all;
        for (const auto& f : rep.files) worst_faulted = std::max(worst_faulted, f.requests);
        p->set_faults({});
    }
    ok = ok && worst_faulted <= t + 1;
    return {ok, std::to_string(healthy.files.size()) + " files, T=" + std::to_string(t) + ": healthy max " +
                    std::to_string(worst_healthy) + " requests per file, one provider down max " +
                    std::to_string(worst_faulted)};
}

// 8. ledger integrity
Outcome ledger_integrity()
{
    using ledger::Action;
    ledger::HashChain chain;
    for (int i = 0; i < 100; ++i) {
        chain.append("actor" + std::to_string(i % 4), static_cast<Action>(1 + i % 14), "will-" + std::to_string(i % 3),
                     as_view("payload " + std::to_string(i)), 1000 + i);
    }
    const auto base = chain.snapshot();
    std::size_t mutations = 0, undetected = 0;
    auto check = [&](std::vector<ledger::LogEntry> v) {
        ++mutations;
        if (ledger::verify_chain(v).ok()) ++undetected;
    };
    for (std::size_t i = 0; i < base.size(); ++i) {
        auto v = base;
        v[i].timestamp += 1;
        check(v);
        v = base;
        v[i].actor += "x";
        check(v);
        v = base;
        v[i].subject += "x";
        check(v);
        v = base;
        v[i].action = v[i].action == Action::Activate ? Action::Veto : Action::Activate;
        check(v);
        v = base;
        v[i].payload_digest[0] ^= 1;
        check(v);
        v = base;
        v[i].seq += 1;
        check(v);
        v = base;
        v[i].prev_hash[31] ^= 1;
        check(v);
        v = base;
        v[i].entry_hash[0] ^= 1;
        check(v);
        if (i + 1 < base.size()) {
            v = base;
            std::swap(v[i], v[i + 1]);
            check(v);
        }
    }

    testgen::BrokerWorld w(1008);
    w.activate();
    w.broker->execute("will-e2e");
    w.broker->retrieve("will-e2e", "cy", w.cy.sk);
    auto happy = ledger::inspect(w.broker->ledger().entries(), w.broker->inspector_params());

    // Synthetic traces, one per rule.
    const ledger::ParamsMap params = {{"w", {2, 3'600'000}}};
    struct Trace {
        ledger::HashChain c;
        TimestampMs now = 10'000;
        Trace& add(Action a, const std::string& actor = "broker", TimestampMs dt = 0)
        {
            now += dt;
            c.append(actor, a, "w", as_view(std::string(ledger::to_string(a))), now);
            return *this;
        }
    };
    const TimestampMs freeze = 3'600'000;
    Trace r1, r2, r3, r4;
    r1.add(Action::DeployWill, "ada").add(Action::TriggerRequest, "bob").add(Action::VoteCast, "bob");
    r1.add(Action::FreezeStart).add(Action::Activate, "broker", freeze);
    r2.add(Action::DeployWill, "ada").add(Action::TriggerRequest, "bob").add(Action::VoteCast, "bob");
    r2.add(Action::VoteCast, "cy").add(Action::FreezeStart).add(Action::Activate, "broker", 60'000);
    r3.add(Action::DeployWill, "ada").add(Action::TriggerRequest, "bob").add(Action::PullData);
    r4.add(Action::DeployWill, "ada").add(Action::TriggerRequest, "bob").add(Action::VoteCast, "bob");
    r4.add(Action::VoteCast, "cy").add(Action::FreezeStart).add(Action::Veto, "ada");
    r4.add(Action::Activate, "broker", freeze);

    std::string rules;
    bool rules_ok = true;
    const std::pair<const char*, Trace*> traces[] = {{"R1", &r1}, {"R2", &r2}, {"R3", &r3}, {"R4", &r4}};
    for (const auto& [rule, t] : traces) {
        auto f = ledger::inspect(t->c.entries(), params);
        bool exact = f.size() == 1 && f[0].rule == rule;
        rules_ok = rules_ok && exact;
        rules += std::string(" ") + rule + (exact ? "=1" : "!");
    }
    bool ok = undetected == 0 && happy.empty() && rules_ok;
    return {ok, std::to_string(mutations) + " mutations/reorders, " + std::to_string(undetected) +
                    " undetected; broker trace " + std::to_string(happy.size()) + " findings; synthetic" + rules};
}

// 9. state-machine safety
Outcome state_machine()
{
    auto r = testgen::model_check_lifecycle(8, 2, 2);
    bool ok = r.violations.empty() && r.executed_reached > 0 && r.veto_checks > 0;
    return {ok, std::to_string(r.states) + " states, " + std::to_string(r.transitions) + " transitions, Executed reached " +
                    std::to_string(r.executed_reached) + " times, " + std::to_string(r.veto_checks) + " veto checks, " +
                    std::to_string(r.violations.size()) + " violations" +
                    (r.violations.empty() ? "" : " (first: " + r.violations.front() + ")")};
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 10. will-file portability
Outcome will_portability()
{
    SeededRandom rng(1010);
    std::size_t bad = 0, extensions = 0;
    for (int i = 0; i < 100; ++i) {
        auto w = testgen::random_will(rng);
        auto xml = willfile::serialize_xml(w);
        auto back = willfile::parse_xml(xml);
        if (!(back == w) || willfile::serialize_xml(back) != xml) ++bad;
        for (std::size_t k = 0; k < w.extensions.size(); ++k) {
            ++extensions;
            if (k >= back.extensions.size() || back.extensions[k].xml != w.extensions[k].xml) ++bad;
        }
    }
    auto golden = read_file(DW_TEST_DATA "/will_golden.xml");
    auto canonical = read_file(DW_TEST_DATA "/will_golden.canonical.xml");
    bool golden_ok = willfile::serialize_xml(willfile::parse_xml(golden)) == canonical &&
                     willfile::parse_xml(canonical) == willfile::parse_xml(golden);
    return {bad == 0 && golden_ok, "100 wills, " + std::to_string(extensions) + " extensions, " +
                                       std::to_string(bad) + " mismatches; golden fixture " +
                                       (golden_ok ? "unchanged" : "changed")};
}

// 11. end-to-end fidelity
Outcome end_to_end()
{
    testgen::BrokerWorld w(1011);
    w.activate();
    auto exec = w.broker->execute("will-e2e");
    auto all = w.adapter_bytes();
    auto bob = w.broker->retrieve("will-e2e", "bob", w.bob.sk);
    auto cy = w.broker->retrieve("will-e2e", "cy", w.cy.sk);

    const auto* cy_heir = w.will.heir("cy");
    std::set<std::string> expect;
    for (const auto& [id, doc] : all) {
        const auto* cp = w.will.policy_for(id);
        if (cp && policy::evaluate(policy::parse_policy(cp->policy), cy_heir->attributes)) expect.insert(id);
    }
    std::set<std::string> got;
    bool bytes_ok = true;
    for (const auto& [id, doc] : cy.recovered()) {
        got.insert(id);
        bytes_ok = bytes_ok && all.count(id) && all.at(id) == doc;
    }
    bool ok = bob.recovered() == all && got == expect && bytes_ok && w.will.platform_links.size() == 3 &&
              w.will.heirs.size() == 2 && w.providers.size() == 4;
    return {ok, "3 platforms, " + std::to_string(exec.shares()) + " shares on 4 providers; all-attribute heir " +
                    std::to_string(bob.recovered().size()) + "/" + std::to_string(all.size()) +
                    " byte-exact; restricted heir " + std::to_string(got.size()) + " (oracle " +
                    std::to_string(expect.size()) + ")"};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"access oracle equivalence", access_oracle},
        {"partial decryption", partial_decryption},
        {"collusion resistance", collusion},
        {"node sharing", node_sharing},
        {"scaling trend", scaling_trend},
        {"Shamir round trip", shamir},
        {"retrieval economy", retrieval_economy},
        {"ledger integrity", ledger_integrity},
        {"state-machine safety", state_machine},
        {"will-file portability", will_portability},
        {"end-to-end fidelity", end_to_end},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        int n = static_cast<int>(i + 1);
        if (!only.empty() && !only.count(n)) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << n << " " << criteria[i].first << ": " << o.detail << " ["
                  << fmt(secs) << " s]" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
