#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dw/policy/policy.hpp"

namespace dw::policy {

using NodeId = std::uint32_t;

enum class NodeKind : std::uint8_t { Data, Link, Attribute };

struct DagNode {
    NodeId id = 0;
    NodeKind kind = NodeKind::Attribute;
    Gate gate = Gate::And;        // link nodes only
    std::string label;            // attribute name or file group id
    std::vector<NodeId> children; // data: 1, link: 2, attribute: 0
    std::vector<NodeId> parents;  // sorted, unique

    unsigned threshold() const { return gate == Gate::And ? 2 : 1; }

    friend bool operator==(const DagNode&, const DagNode&) = default;
};

/// Shared-node access structure. Children always carry smaller ids than
/// their parents, so id order is a topological order.
class IntegratedAccessDAG {
public:
    const std::vector<DagNode>& nodes() const { return nodes_; }
    const DagNode& node(NodeId id) const;
    std::size_t size() const { return nodes_.size(); }

    std::vector<NodeId> data_nodes() const;
    std::vector<NodeId> link_nodes() const;
    std::vector<NodeId> attribute_nodes() const;

    std::optional<NodeId> find(const CanonicalKey& key) const;
    std::optional<NodeId> find_data(std::string_view file_group_id) const;
    std::optional<NodeId> find_attribute(std::string_view name) const;

    /// The policy hanging under a node (for a data node, its root policy).
    PolicyExpr policy_of(NodeId id) const;

    /// One line per node: id kind label children=.. parents=..
    std::string dump() const;
    static IntegratedAccessDAG parse_dump(std::string_view text);

    friend bool operator==(const IntegratedAccessDAG& a, const IntegratedAccessDAG& b)
    {
        return a.nodes_ == b.nodes_;
    }

private:
    friend class DagBuilder;

    NodeId add(DagNode n);
    void reindex();

    std::vector<DagNode> nodes_;
    std::map<CanonicalKey, NodeId> dedup_;
    std::map<std::string, NodeId, std::less<>> data_index_;
};

IntegratedAccessDAG build_dag(const std::vector<std::pair<std::string, PolicyExpr>>& groups);

/// Bottom-up threshold satisfaction over the DAG.
bool evaluate_dag(const IntegratedAccessDAG& dag, NodeId id, const AttributeSet& attrs);

/// Link plus attribute nodes; the figure that competes with standalone trees.
std::size_t structure_node_count(const IntegratedAccessDAG& dag);

} // namespace dw::policy
