#include <gtest/gtest.h>

#include <algorithm>

#include "dw/policy/policy.hpp"
#include "support/random_policy.hpp"

using namespace dw;
using namespace dw::policy;

namespace {

PolicyExpr A() { return PolicyExpr::attr("A"); }
PolicyExpr B() { return PolicyExpr::attr("B"); }
PolicyExpr C() { return PolicyExpr::attr("C"); }

std::size_t error_offset(const std::string& text)
{
    try {
        parse_policy(text);
    } catch (const SyntaxError& e) {
        return e.offset();
    }
    ADD_FAILURE() << "no syntax error for '" << text << "'";
    return 0;
}

// Sorted textual form: an independent normal form up to commutativity.
std::string normal_form(const PolicyExpr& e)
{
    if (e.is_attr()) return e.attribute();
    auto l = normal_form(e.left());
    auto r = normal_form(e.right());
    if (r < l) std::swap(l, r);
    return std::string(e.kind() == PolicyExpr::Kind::And ? "AND[" : "OR[") + l + "," + r + "]";
}

} // namespace

TEST(Parse, SimpleAnd)
{
    EXPECT_EQ(parse_policy("(A and B)"), PolicyExpr::all_of(A(), B()));
}

TEST(Parse, NestedOr)
{
    EXPECT_EQ(parse_policy("((A and B) or C)"), PolicyExpr::any_of(PolicyExpr::all_of(A(), B()), C()));
}

TEST(Parse, SingleAttribute)
{
    EXPECT_EQ(parse_policy("  heir_1 "), PolicyExpr::attr("heir_1"));
}

TEST(Parse, KeywordsAreCaseInsensitive)
{
    EXPECT_EQ(parse_policy("(A AND (B Or C))"), PolicyExpr::all_of(A(), PolicyExpr::any_of(B(), C())));
}

TEST(Parse, AttributesAreCaseSensitive)
{
    EXPECT_NE(parse_policy("a"), parse_policy("A"));
}

TEST(Parse, DanglingGateReportsEndOfInput)
{
    EXPECT_EQ(error_offset("A and"), 5u);
}

TEST(Parse, ErrorOffsets)
{
    EXPECT_EQ(error_offset("(A and B"), 8u);
    EXPECT_EQ(error_offset("(A xor B)"), 3u);
    EXPECT_EQ(error_offset("(A and B))"), 9u);
    EXPECT_EQ(error_offset("A and B"), 2u);
    EXPECT_EQ(error_offset("(and and B)"), 1u);
    EXPECT_EQ(error_offset("(A, B)"), 2u);
    EXPECT_EQ(error_offset("()"), 1u);
}

TEST(Parse, ThresholdSyntaxRejected)
{
    EXPECT_THROW(parse_policy("2 of (A,B,C)"), SyntaxError);
}

TEST(Parse, BlankIsEmptyPolicy)
{
    EXPECT_THROW(parse_policy(""), EmptyPolicy);
    EXPECT_THROW(parse_policy(" \t\n"), EmptyPolicy);
}

TEST(Parse, ToStringRoundTrip)
{
    SeededRandom rng(7);
    for (int i = 0; i < 300; ++i) {
        auto p = testgen::random_policy(rng, 8, 5);
        EXPECT_EQ(parse_policy(p.to_string()), p);
    }
}

TEST(Evaluate, Examples)
{
    auto ab = PolicyExpr::all_of(A(), B());
    EXPECT_TRUE(evaluate(ab, {"A", "B"}));
    EXPECT_FALSE(evaluate(ab, {"C"}));
    EXPECT_FALSE(evaluate(ab, {"A"}));
    EXPECT_TRUE(evaluate(PolicyExpr::any_of(ab, C()), {"C"}));
}

TEST(Expr, Counts)
{
    auto p = parse_policy("((A and B) or (A and C))");
    EXPECT_EQ(p.leaf_count(), 4u);
    EXPECT_EQ(p.node_count(), 7u);
    EXPECT_EQ(p.depth(), 2u);
    EXPECT_EQ(attributes_of(p), (AttributeSet{"A", "B", "C"}));
}

TEST(Expr, InvalidAttributeRejected)
{
    EXPECT_THROW(PolicyExpr::attr("has space"), PolicyError);
    EXPECT_THROW(PolicyExpr::attr("or"), PolicyError);
    EXPECT_THROW(PolicyExpr::attr(""), PolicyError);
}

TEST(CanonicalKey, Commutative)
{
    EXPECT_EQ(canonical_key(parse_policy("(A and B)")), canonical_key(parse_policy("(B and A)")));
    EXPECT_EQ(canonical_key(parse_policy("((A or B) and C)")), canonical_key(parse_policy("(C and (B or A))")));
    EXPECT_NE(canonical_key(parse_policy("(A and B)")), canonical_key(parse_policy("(A or B)")));
}

TEST(CanonicalKey, NoFlatteningOrDistribution)
{
    EXPECT_NE(canonical_key(parse_policy("((A and B) and C)")), canonical_key(parse_policy("(A and (B and C))")));
    EXPECT_NE(canonical_key(parse_policy("(A and (B or C))")),
              canonical_key(parse_policy("((A and B) or (A and C))")));
}

TEST(CanonicalKey, LengthPrefixPreventsCollisions)
{
    EXPECT_NE(canonical_key(PolicyExpr::attr("a1")), canonical_key(PolicyExpr::attr("a")));
    EXPECT_NE(canonical_key(parse_policy("(ab and c)")), canonical_key(parse_policy("(a and bc)")));
}

TEST(CanonicalKey, AgreesWithNormalFormOracle)
{
    SeededRandom rng(11);
    std::vector<PolicyExpr> ps;
    for (int i = 0; i < 400; ++i) ps.push_back(testgen::random_policy(rng, 3, 3));
    for (std::size_t i = 0; i < ps.size(); ++i) {
        for (std::size_t j = i; j < ps.size(); ++j) {
            ASSERT_EQ(canonical_key(ps[i]) == canonical_key(ps[j]), normal_form(ps[i]) == normal_form(ps[j]))
                << ps[i].to_string() << " vs " << ps[j].to_string();
        }
    }
}

TEST(GroupByPolicy, CommutedPoliciesShareGroup)
{
    auto g = group_by_policy({{"f1", parse_policy("(A and B)")}, {"f2", parse_policy("(B and A)")}});
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g[0].payload_ids, (std::vector<std::string>{"f1", "f2"}));
}

TEST(GroupByPolicy, DistinctPolicies)
{
    auto g = group_by_policy({{"f1", parse_policy("(A and B)")}, {"f2", parse_policy("C")}});
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g[0].payload_ids, std::vector<std::string>{"f1"});
    EXPECT_EQ(g[1].payload_ids, std::vector<std::string>{"f2"});
}

TEST(GroupByPolicy, EmptyInput)
{
    EXPECT_TRUE(group_by_policy({}).empty());
}

TEST(GroupByPolicy, OrderByFirstOccurrence)
{
    auto g = group_by_policy({{"x", C()}, {"y", A()}, {"z", C()}});
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g[0].policy, C());
    EXPECT_EQ(g[0].payload_ids, (std::vector<std::string>{"x", "z"}));
}

TEST(GroupByPolicy, DuplicateIdsRejected)
{
    EXPECT_THROW(group_by_policy({{"x", A()}, {"x", B()}}), PolicyError);
}
