#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cftwin {

/// Dense index of a node inside one CausalDiagram.
enum class NodeId : std::uint32_t {};

constexpr std::size_t index_of(NodeId id) noexcept { return static_cast<std::size_t>(id); }
constexpr NodeId node_at(std::size_t index) noexcept {
  return static_cast<NodeId>(static_cast<std::uint32_t>(index));
}

using NodeSet = std::vector<NodeId>;  // kept sorted by index

/// Directed acyclic causal diagram with explicit exogenous nodes. Nodes are
/// indexed in declaration order; that order breaks every tie.
class CausalDiagram {
 public:
  struct Node {
    std::string name;
    bool exogenous = false;
  };

  CausalDiagram() = default;

  /// Validates and builds. Throws Error(Structural) on a cycle (naming one
  /// edge on it), on edges into exogenous nodes and on duplicate names;
  /// Error(Lookup) on edges that reference undeclared names.
  static CausalDiagram create(std::vector<Node> nodes,
                              const std::vector<std::pair<std::string, std::string>>& edges);

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::string& name(NodeId id) const { return nodes_[index_of(id)].name; }
  bool is_exogenous(NodeId id) const { return nodes_[index_of(id)].exogenous; }

  /// Throws Error(Lookup) for unknown names.
  NodeId id(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::span<const NodeId> parents(NodeId id) const { return parents_[index_of(id)]; }
  std::span<const NodeId> children(NodeId id) const { return children_[index_of(id)]; }

  NodeSet endogenous() const;
  NodeSet exogenous() const;
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  /// Kahn's algorithm with declaration-order tie-breaking; cached at create().
  std::span<const NodeId> topological_order() const { return topo_; }
  std::size_t topological_rank(NodeId id) const { return rank_[index_of(id)]; }

  NodeSet ancestors(NodeId id) const;
  NodeSet descendants(NodeId id) const;
  bool is_ancestor(NodeId maybe_ancestor, NodeId of) const;

  /// Standard d-separation of `x` and `y` given `z` (reachability / Bayes-ball).
  /// Throws Error(Argument) when the three sets overlap.
  bool d_separated(std::span<const NodeId> x, std::span<const NodeId> y,
                   std::span<const NodeId> z) const;

  /// Same diagram with the listed edges removed.
  CausalDiagram without_edges(std::span<const std::pair<NodeId, NodeId>> removed) const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<NodeId> topo_;
  std::vector<std::size_t> rank_;
  std::unordered_map<std::string, NodeId> by_name_;

  static CausalDiagram from_indices(std::vector<Node> nodes,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& edges);
};

std::vector<std::string> names_of(const CausalDiagram& d, std::span<const NodeId> ids);

}  // namespace cftwin
