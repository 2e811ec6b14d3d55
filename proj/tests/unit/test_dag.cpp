#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "dw/policy/dag.hpp"
#include "support/random_policy.hpp"

using namespace dw;
using namespace dw::policy;

namespace {

using Groups = std::vector<std::pair<std::string, PolicyExpr>>;

Groups parse_groups(std::initializer_list<std::pair<const char*, const char*>> g)
{
    Groups out;
    for (auto [id, text] : g) out.emplace_back(id, parse_policy(text));
    return out;
}

// Census oracle: distinct sub-expressions up to commutativity, collected
// from the trees directly without touching the DAG code.
void census(const PolicyExpr& e, std::set<std::string>& seen)
{
    std::function<std::string(const PolicyExpr&)> nf = [&](const PolicyExpr& x) -> std::string {
        if (x.is_attr()) return "'" + x.attribute() + "'";
        auto l = nf(x.left());
        auto r = nf(x.right());
        if (r < l) std::swap(l, r);
        auto s = std::string(x.kind() == PolicyExpr::Kind::And ? "&" : "|") + "{" + l + ";" + r + "}";
        seen.insert(s);
        return s;
    };
    seen.insert(nf(e));
    for (const auto& a : attributes_of(e)) seen.insert("'" + a + "'");
}

std::size_t census_count(const Groups& g)
{
    std::set<std::string> seen;
    for (const auto& [id, p] : g) census(p, seen);
    return seen.size();
}

std::size_t standalone_count(const Groups& g)
{
    std::size_t n = 0;
    for (const auto& [id, p] : g) n += p.node_count();
    return n;
}

} // namespace

TEST(Dag, SubsetPolicySharesNode)
{
    auto dag = build_dag(parse_groups({{"F1", "(A and B)"}, {"F2", "((A and B) or C)"}}));
    auto f1 = dag.node(*dag.find_data("F1"));
    auto f2 = dag.node(*dag.find_data("F2"));
    const auto& or_node = dag.node(f2.children[0]);
    EXPECT_EQ(or_node.gate, Gate::Or);
    EXPECT_NE(std::find(or_node.children.begin(), or_node.children.end(), f1.children[0]), or_node.children.end());
    EXPECT_EQ(dag.node(f1.children[0]).parents.size(), 2u);
}

TEST(Dag, SubsetExampleCensus)
{
    // Frozen from the census oracle: {A, B, C, (A and B), ((A and B) or C)}
    // against 3 + 5 standalone nodes.
    auto g = parse_groups({{"F1", "(A and B)"}, {"F2", "((A and B) or C)"}});
    EXPECT_EQ(census_count(g), 5u);
    EXPECT_EQ(standalone_count(g), 8u);
    auto dag = build_dag(g);
    EXPECT_EQ(structure_node_count(dag), 5u);
    EXPECT_EQ(dag.link_nodes().size(), 2u);
    EXPECT_EQ(dag.attribute_nodes().size(), 3u);
    EXPECT_EQ(dag.data_nodes().size(), 2u);
}

TEST(Dag, DisjointPoliciesStayApart)
{
    auto dag = build_dag(parse_groups({{"F1", "(A and B)"}, {"F2", "C"}}));
    EXPECT_EQ(structure_node_count(dag), 4u);
    auto f1_root = dag.node(*dag.find_data("F1")).children[0];
    auto f2_root = dag.node(*dag.find_data("F2")).children[0];
    EXPECT_NE(f1_root, f2_root);
    EXPECT_FALSE(evaluate_dag(dag, *dag.find_data("F1"), {"C"}));
    EXPECT_TRUE(evaluate_dag(dag, *dag.find_data("F2"), {"C"}));
}

TEST(Dag, SingleAttribute)
{
    auto dag = build_dag(parse_groups({{"F1", "A"}}));
    EXPECT_EQ(dag.data_nodes().size(), 1u);
    EXPECT_EQ(dag.link_nodes().size(), 0u);
    EXPECT_EQ(dag.attribute_nodes().size(), 1u);
}

TEST(Dag, AttributesDeduplicatedAcrossUnrelatedPolicies)
{
    auto dag = build_dag(parse_groups({{"F1", "(A and B)"}, {"F2", "(A or C)"}}));
    EXPECT_EQ(dag.attribute_nodes().size(), 3u);
    EXPECT_EQ(dag.node(*dag.find_attribute("A")).parents.size(), 2u);
}

TEST(Dag, DuplicateGroupRejected)
{
    EXPECT_THROW(build_dag(parse_groups({{"F1", "A"}, {"F1", "B"}})), PolicyError);
}

TEST(Dag, ChildrenPrecedeParents)
{
    SeededRandom rng(3);
    Groups g;
    for (int i = 0; i < 20; ++i) g.emplace_back("f" + std::to_string(i), testgen::random_policy(rng, 6, 4));
    auto dag = build_dag(g);
    for (const auto& n : dag.nodes()) {
        for (auto c : n.children) EXPECT_LT(c, n.id);
        for (auto p : n.parents) EXPECT_GT(p, n.id);
    }
}

TEST(Dag, CensusMatchesOracleOnRandomGroups)
{
    SeededRandom rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        Groups g;
        std::set<std::string> keys;
        const auto n = 1 + rng.uniform(6);
        for (std::size_t i = 0; i < n; ++i) {
            auto p = testgen::random_policy(rng, 5, 4);
            if (!keys.insert(canonical_key(p).bytes).second) continue;
            g.emplace_back("f" + std::to_string(i), p);
        }
        auto dag = build_dag(g);
        ASSERT_EQ(structure_node_count(dag), census_count(g));
        ASSERT_LE(structure_node_count(dag), standalone_count(g));
        // One node per canonical key.
        std::set<std::string> seen;
        for (const auto& node : dag.nodes()) {
            if (node.kind == NodeKind::Data) continue;
            ASSERT_TRUE(seen.insert(canonical_key(dag.policy_of(node.id)).bytes).second);
        }
    }
}

TEST(Dag, StrictSavingWhenSomethingShared)
{
    auto g = parse_groups({{"F1", "(A and B)"}, {"F2", "(A and C)"}});
    EXPECT_LT(structure_node_count(build_dag(g)), standalone_count(g));
}

TEST(Dag, EvaluationMatchesTreeSemantics)
{
    SeededRandom rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        Groups g;
        for (int i = 0; i < 4; ++i) g.emplace_back("f" + std::to_string(i), testgen::random_policy(rng, 6, 4));
        // Same canonical policy twice is a caller error for build_dag only
        // through duplicate ids, so collisions are fine here.
        auto dag = build_dag(g);
        auto attrs = testgen::random_attrs(rng, 6);
        for (const auto& [id, p] : g) {
            ASSERT_EQ(evaluate_dag(dag, *dag.find_data(id), attrs), evaluate(p, attrs)) << p.to_string();
        }
    }
}

TEST(Dag, Deterministic)
{
    SeededRandom rng(13);
    Groups g;
    for (int i = 0; i < 10; ++i) g.emplace_back("f" + std::to_string(i), testgen::random_policy(rng, 6, 4));
    EXPECT_EQ(build_dag(g), build_dag(g));
    EXPECT_EQ(build_dag(g).dump(), build_dag(g).dump());
}

TEST(Dag, PolicyOfRebuildsEquivalentTree)
{
    auto g = parse_groups({{"F1", "((A or B) and (C and A))"}});
    auto dag = build_dag(g);
    EXPECT_EQ(canonical_key(dag.policy_of(*dag.find_data("F1"))), canonical_key(g[0].second));
}

TEST(DagDump, Golden)
{
    auto dag = build_dag(parse_groups({{"F1", "(A and B)"}, {"F 2", "((A and B) or C)"}}));
    EXPECT_EQ(dag.dump(),
              "0 attr A children=- parents=2\n"
              "1 attr B children=- parents=2\n"
              "2 and - children=0,1 parents=3,5\n"
              "3 data F1 children=2 parents=-\n"
              "4 attr C children=- parents=5\n"
              "5 or - children=2,4 parents=6\n"
              "6 data F%202 children=5 parents=-\n");
}

TEST(DagDump, ParseRoundTrip)
{
    SeededRandom rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        Groups g;
        for (int i = 0; i < 5; ++i) g.emplace_back("grp/" + std::to_string(i) + " %x", testgen::random_policy(rng, 6, 4));
        auto dag = build_dag(g);
        auto back = IntegratedAccessDAG::parse_dump(dag.dump());
        ASSERT_EQ(back, dag);
        for (const auto& [id, p] : g) ASSERT_TRUE(back.find_data(id));
    }
}

TEST(DagDump, RejectsBrokenStructure)
{
    EXPECT_THROW(IntegratedAccessDAG::parse_dump("0 and - children=0,0 parents=-\n"), PolicyError);
    EXPECT_THROW(IntegratedAccessDAG::parse_dump("0 attr A children=- parents=1\n"), PolicyError);
    EXPECT_THROW(IntegratedAccessDAG::parse_dump("1 attr A children=- parents=-\n"), PolicyError);
    EXPECT_THROW(IntegratedAccessDAG::parse_dump("0 attr A children=- parents=-\n"
                                                 "1 attr A children=- parents=-\n"),
                 PolicyError);
    EXPECT_THROW(IntegratedAccessDAG::parse_dump("0 gate A children=- parents=-\n"), PolicyError);
}
