#pragma once

#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dw/common/bytes.hpp"

namespace dw::policy {

class PolicyError : public Error {
public:
    using Error::Error;
};

/// Malformed policy text. offset() is the byte position of the problem.
class SyntaxError : public PolicyError {
public:
    SyntaxError(std::size_t offset, const std::string& what);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class EmptyPolicy : public PolicyError {
public:
    EmptyPolicy() : PolicyError("policy is empty") {}
};

using AttributeSet = std::set<std::string>;

/// Letters, digits and underscore; never the words "and"/"or".
bool is_valid_attribute(std::string_view token);

enum class Gate : std::uint8_t { And, Or };

/// Immutable Boolean policy tree with binary gates. Copies share structure.
class PolicyExpr {
public:
    enum class Kind : std::uint8_t { Attr, And, Or };

    static PolicyExpr attr(std::string name);
    static PolicyExpr all_of(PolicyExpr left, PolicyExpr right);
    static PolicyExpr any_of(PolicyExpr left, PolicyExpr right);
    static PolicyExpr gate(Gate g, PolicyExpr left, PolicyExpr right);

    Kind kind() const { return kind_; }
    bool is_attr() const { return kind_ == Kind::Attr; }
    Gate gate() const;
    const std::string& attribute() const { return attribute_; }
    const PolicyExpr& left() const { return *left_; }
    const PolicyExpr& right() const { return *right_; }

    /// Fully parenthesized text that parses back to the same tree.
    std::string to_string() const;
    std::size_t leaf_count() const;
    /// Gates plus leaves of the tree as written.
    std::size_t node_count() const;
    std::size_t depth() const;

    friend bool operator==(const PolicyExpr& a, const PolicyExpr& b);

private:
    PolicyExpr() = default;

    Kind kind_ = Kind::Attr;
    std::string attribute_;
    std::shared_ptr<const PolicyExpr> left_;
    std::shared_ptr<const PolicyExpr> right_;
};

/// expr := attribute | '(' expr ('and'|'or') expr ')'
/// Keywords are case-insensitive; every binary gate needs its own parentheses.
PolicyExpr parse_policy(std::string_view text);

bool evaluate(const PolicyExpr& policy, const AttributeSet& attrs);

AttributeSet attributes_of(const PolicyExpr& policy);

/// Structural encoding of a sub-expression, identical for And(a,b) and
/// And(b,a). Attribute names are length-prefixed so keys never collide.
struct CanonicalKey {
    std::string bytes;

    friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
};

CanonicalKey canonical_key(const PolicyExpr& policy);

struct PolicyGroup {
    CanonicalKey key;
    PolicyExpr policy;
    std::vector<std::string> payload_ids;
};

/// Buckets payloads whose policies share a canonical key. Groups appear in
/// order of first occurrence. Throws PolicyError on duplicate payload ids.
std::vector<PolicyGroup> group_by_policy(const std::vector<std::pair<std::string, PolicyExpr>>& items);

} // namespace dw::policy
