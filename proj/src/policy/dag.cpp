#include "dw/policy/dag.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

namespace dw::policy {

const DagNode& IntegratedAccessDAG::node(NodeId id) const
{
    if (id >= nodes_.size()) throw PolicyError("unknown DAG node " + std::to_string(id));
    return nodes_[id];
}

namespace {

std::vector<NodeId> ids_of_kind(const std::vector<DagNode>& nodes, NodeKind kind)
{
    std::vector<NodeId> out;
    for (const auto& n : nodes) {
        if (n.kind == kind) out.push_back(n.id);
    }
    return out;
}

} // namespace

std::vector<NodeId> IntegratedAccessDAG::data_nodes() const { return ids_of_kind(nodes_, NodeKind::Data); }
std::vector<NodeId> IntegratedAccessDAG::link_nodes() const { return ids_of_kind(nodes_, NodeKind::Link); }
std::vector<NodeId> IntegratedAccessDAG::attribute_nodes() const
{
    return ids_of_kind(nodes_, NodeKind::Attribute);
}

std::optional<NodeId> IntegratedAccessDAG::find(const CanonicalKey& key) const
{
    auto it = dedup_.find(key);
    if (it == dedup_.end()) return std::nullopt;
    return it->second;
}

std::optional<NodeId> IntegratedAccessDAG::find_data(std::string_view file_group_id) const
{
    auto it = data_index_.find(file_group_id);
    if (it == data_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<NodeId> IntegratedAccessDAG::find_attribute(std::string_view name) const
{
    if (!is_valid_attribute(name)) return std::nullopt;
    return find(canonical_key(PolicyExpr::attr(std::string(name))));
}

PolicyExpr IntegratedAccessDAG::policy_of(NodeId id) const
{
    const auto& n = node(id);
    switch (n.kind) {
    case NodeKind::Attribute:
        return PolicyExpr::attr(n.label);
    case NodeKind::Link:
        return PolicyExpr::gate(n.gate, policy_of(n.children[0]), policy_of(n.children[1]));
    case NodeKind::Data:
        return policy_of(n.children[0]);
    }
    throw PolicyError("bad node kind");
}

NodeId IntegratedAccessDAG::add(DagNode n)
{
    n.id = static_cast<NodeId>(nodes_.size());
    for (NodeId c : n.children) {
        auto& parents = nodes_[c].parents;
        if (std::find(parents.begin(), parents.end(), n.id) == parents.end()) parents.push_back(n.id);
    }
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
}

void IntegratedAccessDAG::reindex()
{
    dedup_.clear();
    data_index_.clear();
    for (const auto& n : nodes_) {
        if (n.kind == NodeKind::Data) {
            data_index_.emplace(n.label, n.id);
        } else {
            dedup_.emplace(canonical_key(policy_of(n.id)), n.id);
        }
    }
}

class DagBuilder {
public:
    explicit DagBuilder(IntegratedAccessDAG& dag) : dag_(dag) {}

    NodeId intern(const PolicyExpr& e)
    {
        auto key = canonical_key(e);
        if (auto hit = dag_.find(key)) return *hit;

        DagNode n;
        if (e.is_attr()) {
            n.kind = NodeKind::Attribute;
            n.label = e.attribute();
        } else {
            NodeId l = intern(e.left());
            NodeId r = intern(e.right());
            n.kind = NodeKind::Link;
            n.gate = e.gate();
            n.children = {l, r};
        }
        NodeId id = dag_.add(std::move(n));
        dag_.dedup_.emplace(std::move(key), id);
        return id;
    }

    void add_data(const std::string& group_id, const PolicyExpr& policy)
    {
        if (dag_.data_index_.count(group_id)) {
            throw PolicyError("duplicate file group id '" + group_id + "'");
        }
        NodeId root = intern(policy);
        DagNode n;
        n.kind = NodeKind::Data;
        n.label = group_id;
        n.children = {root};
        NodeId id = dag_.add(std::move(n));
        dag_.data_index_.emplace(group_id, id);
    }

private:
    IntegratedAccessDAG& dag_;
};

IntegratedAccessDAG build_dag(const std::vector<std::pair<std::string, PolicyExpr>>& groups)
{
    IntegratedAccessDAG dag;
    DagBuilder b(dag);
    for (const auto& [id, policy] : groups) b.add_data(id, policy);
    return dag;
}

bool evaluate_dag(const IntegratedAccessDAG& dag, NodeId id, const AttributeSet& attrs)
{
    std::vector<char> sat(id + 1, 0);
    for (NodeId i = 0; i <= id; ++i) {
        const auto& n = dag.node(i);
        switch (n.kind) {
        case NodeKind::Attribute:
            sat[i] = attrs.count(n.label) != 0;
            break;
        case NodeKind::Data:
            sat[i] = sat[n.children[0]];
            break;
        case NodeKind::Link: {
            unsigned count = 0;
            for (NodeId c : n.children) count += sat[c] ? 1 : 0;
            sat[i] = count >= n.threshold();
            break;
        }
        }
    }
    return sat[id] != 0;
}

std::size_t structure_node_count(const IntegratedAccessDAG& dag)
{
    return dag.link_nodes().size() + dag.attribute_nodes().size();
}

// ---- dump ----

namespace {

bool plain_label_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == ':' || c == '/';
}

std::string escape_label(std::string_view s)
{
    if (s.empty()) return "%";
    std::string out;
    for (char c : s) {
        if (plain_label_char(c)) {
            out += c;
        } else {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%%%02X", static_cast<unsigned char>(c));
            out += buf;
        }
    }
    return out;
}

std::string unescape_label(std::string_view s)
{
    if (s == "%") return {};
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '%') {
            out += s[i];
            continue;
        }
        if (i + 2 >= s.size()) throw PolicyError("bad escape in dump");
        auto hex = from_hex(s.substr(i + 1, 2));
        out += static_cast<char>(hex.at(0));
        i += 2;
    }
    return out;
}

std::string join_ids(const std::vector<NodeId>& ids)
{
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(ids[i]);
    }
    return out.empty() ? "-" : out;
}

std::vector<NodeId> split_ids(std::string_view s)
{
    std::vector<NodeId> out;
    if (s == "-") return out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        auto part = s.substr(start, comma == std::string_view::npos ? s.npos : comma - start);
        if (part.empty()) throw PolicyError("empty id in dump");
        NodeId v = 0;
        for (char c : part) {
            if (c < '0' || c > '9') throw PolicyError("bad id in dump");
            v = v * 10 + static_cast<NodeId>(c - '0');
        }
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

const char* kind_word(const DagNode& n)
{
    switch (n.kind) {
    case NodeKind::Data:
        return "data";
    case NodeKind::Attribute:
        return "attr";
    case NodeKind::Link:
        return n.gate == Gate::And ? "and" : "or";
    }
    return "?";
}

} // namespace

std::string IntegratedAccessDAG::dump() const
{
    std::string out;
    for (const auto& n : nodes_) {
        std::vector<NodeId> parents = n.parents;
        std::sort(parents.begin(), parents.end());
        out += std::to_string(n.id);
        out += ' ';
        out += kind_word(n);
        out += ' ';
        out += n.kind == NodeKind::Link ? std::string("-") : escape_label(n.label);
        out += " children=" + join_ids(n.children);
        out += " parents=" + join_ids(parents);
        out += '\n';
    }
    return out;
}

IntegratedAccessDAG IntegratedAccessDAG::parse_dump(std::string_view text)
{
    IntegratedAccessDAG dag;
    std::vector<std::vector<NodeId>> declared_parents;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string id_s, kind, label, ch, pa, extra;
        if (!(ls >> id_s >> kind >> label >> ch >> pa) || (ls >> extra)) {
            throw PolicyError("malformed dump line: " + line);
        }
        if (ch.rfind("children=", 0) != 0 || pa.rfind("parents=", 0) != 0) {
            throw PolicyError("malformed dump line: " + line);
        }
        auto ids = split_ids(id_s);
        if (ids.size() != 1 || ids[0] != dag.nodes_.size()) throw PolicyError("dump ids out of order");

        DagNode n;
        n.id = ids[0];
        n.children = split_ids(std::string_view(ch).substr(9));
        if (kind == "data") {
            n.kind = NodeKind::Data;
        } else if (kind == "attr") {
            n.kind = NodeKind::Attribute;
        } else if (kind == "and" || kind == "or") {
            n.kind = NodeKind::Link;
            n.gate = kind == "and" ? Gate::And : Gate::Or;
        } else {
            throw PolicyError("unknown node kind '" + kind + "'");
        }
        const std::size_t want = n.kind == NodeKind::Data ? 1 : n.kind == NodeKind::Link ? 2 : 0;
        if (n.children.size() != want) throw PolicyError("wrong child count at node " + id_s);
        for (NodeId c : n.children) {
            if (c >= n.id) throw PolicyError("child id not below parent at node " + id_s);
            if (dag.nodes_[c].kind == NodeKind::Data) throw PolicyError("data node used as child");
        }
        if (n.kind == NodeKind::Link) {
            if (label != "-") throw PolicyError("link node carries a label");
        } else {
            n.label = unescape_label(label);
            if (n.kind == NodeKind::Attribute && !is_valid_attribute(n.label)) {
                throw PolicyError("invalid attribute in dump");
            }
        }
        declared_parents.push_back(split_ids(std::string_view(pa).substr(8)));
        dag.add(std::move(n));
    }
    for (auto& n : dag.nodes_) {
        std::vector<NodeId> derived = n.parents;
        std::sort(derived.begin(), derived.end());
        if (derived != declared_parents[n.id]) throw PolicyError("parent list mismatch at node " +
                                                                 std::to_string(n.id));
        n.parents = derived;
    }
    dag.reindex();
    if (dag.dedup_.size() + dag.data_index_.size() != dag.nodes_.size()) {
        throw PolicyError("dump contains duplicate nodes");
    }
    return dag;
}

} // namespace dw::policy
