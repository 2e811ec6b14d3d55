#include "dw/policy/policy.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_set>

namespace dw::policy {

SyntaxError::SyntaxError(std::size_t offset, const std::string& what)
    : PolicyError("policy syntax error at offset " + std::to_string(offset) + ": " + what),
      offset_(offset)
{
}

namespace {

bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

bool is_token_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

} // namespace

bool is_valid_attribute(std::string_view token)
{
    if (token.empty()) return false;
    if (!std::all_of(token.begin(), token.end(), is_token_char)) return false;
    return !iequals(token, "and") && !iequals(token, "or");
}

PolicyExpr PolicyExpr::attr(std::string name)
{
    if (!is_valid_attribute(name)) {
        throw PolicyError("invalid attribute name '" + name + "'");
    }
    PolicyExpr e;
    e.kind_ = Kind::Attr;
    e.attribute_ = std::move(name);
    return e;
}

PolicyExpr PolicyExpr::gate(Gate g, PolicyExpr left, PolicyExpr right)
{
    PolicyExpr e;
    e.kind_ = g == Gate::And ? Kind::And : Kind::Or;
    e.left_ = std::make_shared<const PolicyExpr>(std::move(left));
    e.right_ = std::make_shared<const PolicyExpr>(std::move(right));
    return e;
}

PolicyExpr PolicyExpr::all_of(PolicyExpr left, PolicyExpr right)
{
    return gate(Gate::And, std::move(left), std::move(right));
}

PolicyExpr PolicyExpr::any_of(PolicyExpr left, PolicyExpr right)
{
    return gate(Gate::Or, std::move(left), std::move(right));
}

Gate PolicyExpr::gate() const
{
    if (kind_ == Kind::Attr) throw PolicyError("attribute leaf has no gate");
    return kind_ == Kind::And ? Gate::And : Gate::Or;
}

std::string PolicyExpr::to_string() const
{
    if (is_attr()) return attribute_;
    return "(" + left_->to_string() + (kind_ == Kind::And ? " and " : " or ") + right_->to_string() +
           ")";
}

std::size_t PolicyExpr::leaf_count() const
{
    return is_attr() ? 1 : left_->leaf_count() + right_->leaf_count();
}

std::size_t PolicyExpr::node_count() const
{
    return is_attr() ? 1 : 1 + left_->node_count() + right_->node_count();
}

std::size_t PolicyExpr::depth() const
{
    return is_attr() ? 0 : 1 + std::max(left_->depth(), right_->depth());
}

bool operator==(const PolicyExpr& a, const PolicyExpr& b)
{
    if (a.kind_ != b.kind_) return false;
    if (a.is_attr()) return a.attribute_ == b.attribute_;
    return *a.left_ == *b.left_ && *a.right_ == *b.right_;
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    PolicyExpr parse_top()
    {
        skip_ws();
        if (pos_ == text_.size()) throw EmptyPolicy();
        PolicyExpr e = parse_expr();
        skip_ws();
        if (pos_ == text_.size()) return e;

        const std::size_t at = pos_;
        if (peek_keyword()) {
            // An unparenthesized gate. Finish reading its right operand first
            // so a truncated expression reports where input ran out.
            read_word();
            parse_expr();
            throw SyntaxError(at, "binary gate must be enclosed in parentheses");
        }
        throw SyntaxError(at, "unexpected trailing input");
    }

private:
    PolicyExpr parse_expr()
    {
        skip_ws();
        if (pos_ == text_.size()) throw SyntaxError(pos_, "expected attribute or '('");
        if (text_[pos_] == '(') {
            ++pos_;
            PolicyExpr left = parse_expr();
            skip_ws();
            const std::size_t op_at = pos_;
            if (pos_ == text_.size()) throw SyntaxError(pos_, "expected 'and' or 'or'");
            auto op = read_word();
            Gate g;
            if (iequals(op, "and")) {
                g = Gate::And;
            } else if (iequals(op, "or")) {
                g = Gate::Or;
            } else {
                throw SyntaxError(op_at, "expected 'and' or 'or'");
            }
            PolicyExpr right = parse_expr();
            skip_ws();
            if (pos_ == text_.size()) throw SyntaxError(pos_, "expected ')'");
            if (text_[pos_] != ')') throw SyntaxError(pos_, "expected ')'");
            ++pos_;
            return PolicyExpr::gate(g, std::move(left), std::move(right));
        }
        const std::size_t at = pos_;
        auto word = read_word();
        if (word.empty()) {
            throw SyntaxError(at, std::string("unexpected character '") + text_[at] + "'");
        }
        if (!is_valid_attribute(word)) {
            throw SyntaxError(at, "keyword '" + std::string(word) + "' used as attribute");
        }
        return PolicyExpr::attr(std::string(word));
    }

    bool peek_keyword()
    {
        auto save = pos_;
        auto w = read_word();
        pos_ = save;
        return iequals(w, "and") || iequals(w, "or");
    }

    std::string_view read_word()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_token_char(text_[pos_])) ++pos_;
        return text_.substr(start, pos_ - start);
    }

    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

void collect_attributes(const PolicyExpr& e, AttributeSet& out)
{
    if (e.is_attr()) {
        out.insert(e.attribute());
        return;
    }
    collect_attributes(e.left(), out);
    collect_attributes(e.right(), out);
}

} // namespace

PolicyExpr parse_policy(std::string_view text)
{
    return Parser(text).parse_top();
}

bool evaluate(const PolicyExpr& policy, const AttributeSet& attrs)
{
    switch (policy.kind()) {
    case PolicyExpr::Kind::Attr:
        return attrs.count(policy.attribute()) != 0;
    case PolicyExpr::Kind::And:
        return evaluate(policy.left(), attrs) && evaluate(policy.right(), attrs);
    case PolicyExpr::Kind::Or:
        return evaluate(policy.left(), attrs) || evaluate(policy.right(), attrs);
    }
    return false;
}

AttributeSet attributes_of(const PolicyExpr& policy)
{
    AttributeSet out;
    collect_attributes(policy, out);
    return out;
}

CanonicalKey canonical_key(const PolicyExpr& policy)
{
    if (policy.is_attr()) {
        return {"a" + std::to_string(policy.attribute().size()) + ":" + policy.attribute()};
    }
    auto l = canonical_key(policy.left()).bytes;
    auto r = canonical_key(policy.right()).bytes;
    if (r < l) std::swap(l, r);
    const char tag = policy.kind() == PolicyExpr::Kind::And ? '&' : '|';
    return {std::string(1, tag) + "(" + l + r + ")"};
}

std::vector<PolicyGroup> group_by_policy(const std::vector<std::pair<std::string, PolicyExpr>>& items)
{
    std::vector<PolicyGroup> groups;
    std::map<CanonicalKey, std::size_t> index;
    std::unordered_set<std::string> seen;
    for (const auto& [id, policy] : items) {
        if (!seen.insert(id).second) {
            throw PolicyError("duplicate payload id '" + id + "'");
        }
        auto key = canonical_key(policy);
        auto it = index.find(key);
        if (it == index.end()) {
            index.emplace(key, groups.size());
            groups.push_back(PolicyGroup{std::move(key), policy, {id}});
        } else {
            groups[it->second].payload_ids.push_back(id);
        }
    }
    return groups;
}

} // namespace dw::policy
