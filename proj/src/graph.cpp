#include "cftwin/graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <queue>

#include "cftwin/error.hpp"

namespace cftwin {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Lookup: return "lookup";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

namespace {

std::vector<NodeId> cycle_through(const std::vector<std::vector<NodeId>>& parents,
                                  const std::vector<bool>& remaining, std::size_t start) {
  // Every remaining node keeps at least one remaining parent, so walking
  // parents must eventually revisit a node.
  std::vector<std::size_t> seen_at(parents.size(), SIZE_MAX);
  std::vector<NodeId> walk;
  std::size_t cur = start;
  while (seen_at[cur] == SIZE_MAX) {
    seen_at[cur] = walk.size();
    walk.push_back(node_at(cur));
    for (NodeId p : parents[cur]) {
      if (remaining[index_of(p)]) {
        cur = index_of(p);
        break;
      }
    }
  }
  std::vector<NodeId> cycle(walk.begin() + static_cast<std::ptrdiff_t>(seen_at[cur]), walk.end());
  std::reverse(cycle.begin(), cycle.end());  // parent -> child order
  return cycle;
}

}  // namespace

CausalDiagram CausalDiagram::create(std::vector<Node> nodes,
                                    const std::vector<std::pair<std::string, std::string>>& edges) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].name.empty()) throw Error(ErrorKind::Structural, "empty variable name");
    if (!index.emplace(nodes[i].name, i).second)
      throw Error(ErrorKind::Structural, "duplicate variable '" + nodes[i].name + "'");
  }
  std::vector<std::pair<std::size_t, std::size_t>> idx_edges;
  idx_edges.reserve(edges.size());
  for (const auto& [from, to] : edges) {
    auto f = index.find(from);
    auto t = index.find(to);
    if (f == index.end()) throw Error(ErrorKind::Lookup, "edge references unknown node '" + from + "'");
    if (t == index.end()) throw Error(ErrorKind::Lookup, "edge references unknown node '" + to + "'");
    idx_edges.emplace_back(f->second, t->second);
  }
  return from_indices(std::move(nodes), idx_edges);
}

CausalDiagram CausalDiagram::from_indices(
    std::vector<Node> nodes, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  CausalDiagram d;
  d.nodes_ = std::move(nodes);
  const std::size_t n = d.nodes_.size();
  d.parents_.assign(n, {});
  d.children_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) d.by_name_.emplace(d.nodes_[i].name, node_at(i));

  for (auto [from, to] : edges) {
    if (d.nodes_[to].exogenous)
      throw Error(ErrorKind::Structural, "exogenous node '" + d.nodes_[to].name +
                                             "' cannot have parents (edge from '" +
                                             d.nodes_[from].name + "')");
    if (from == to)
      throw Error(ErrorKind::Structural,
                  "cycle detected: self-loop on '" + d.nodes_[from].name + "'");
    auto& ps = d.parents_[to];
    if (std::find(ps.begin(), ps.end(), node_at(from)) != ps.end()) continue;
    ps.push_back(node_at(from));
    d.children_[from].push_back(node_at(to));
  }
  for (auto& ps : d.parents_) std::sort(ps.begin(), ps.end());
  for (auto& cs : d.children_) std::sort(cs.begin(), cs.end());

  std::vector<std::size_t> indegree(n);
  for (std::size_t i = 0; i < n; ++i) indegree[i] = d.parents_[i].size();
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  while (!ready.empty()) {
    std::size_t cur = ready.top();
    ready.pop();
    d.topo_.push_back(node_at(cur));
    for (NodeId c : d.children_[cur])
      if (--indegree[index_of(c)] == 0) ready.push(index_of(c));
  }
  if (d.topo_.size() != n) {
    std::vector<bool> remaining(n, true);
    for (NodeId v : d.topo_) remaining[index_of(v)] = false;
    std::size_t start = 0;
    while (!remaining[start]) ++start;
    auto cycle = cycle_through(d.parents_, remaining, start);
    std::string path;
    for (NodeId v : cycle) path += d.nodes_[index_of(v)].name + " -> ";
    path += d.nodes_[index_of(cycle.front())].name;
    throw Error(ErrorKind::Structural,
                "cycle detected: edge " + d.nodes_[index_of(cycle[0])].name + " -> " +
                    d.nodes_[index_of(cycle.size() > 1 ? cycle[1] : cycle[0])].name +
                    " lies on cycle " + path);
  }
  d.rank_.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) d.rank_[index_of(d.topo_[r])] = r;
  return d;
}

NodeId CausalDiagram::id(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end())
    throw Error(ErrorKind::Lookup, "unknown variable '" + std::string(name) + "'");
  return it->second;
}

bool CausalDiagram::contains(std::string_view name) const {
  return by_name_.count(std::string(name)) != 0;
}

NodeSet CausalDiagram::endogenous() const {
  NodeSet out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (!nodes_[i].exogenous) out.push_back(node_at(i));
  return out;
}

NodeSet CausalDiagram::exogenous() const {
  NodeSet out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].exogenous) out.push_back(node_at(i));
  return out;
}

std::vector<std::pair<NodeId, NodeId>> CausalDiagram::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (std::size_t c = 0; c < nodes_.size(); ++c)
    for (NodeId p : parents_[c]) out.emplace_back(p, node_at(c));
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

NodeSet reach(const std::vector<std::vector<NodeId>>& next, NodeId from) {
  std::vector<bool> seen(next.size(), false);
  std::deque<NodeId> todo{from};
  while (!todo.empty()) {
    NodeId cur = todo.front();
    todo.pop_front();
    for (NodeId nb : next[index_of(cur)]) {
      if (!seen[index_of(nb)]) {
        seen[index_of(nb)] = true;
        todo.push_back(nb);
      }
    }
  }
  NodeSet out;
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i] && node_at(i) != from) out.push_back(node_at(i));
  return out;
}

}  // namespace

NodeSet CausalDiagram::ancestors(NodeId id) const {
  if (index_of(id) >= nodes_.size()) throw Error(ErrorKind::Lookup, "unknown node index");
  return reach(parents_, id);
}

NodeSet CausalDiagram::descendants(NodeId id) const {
  if (index_of(id) >= nodes_.size()) throw Error(ErrorKind::Lookup, "unknown node index");
  return reach(children_, id);
}

bool CausalDiagram::is_ancestor(NodeId maybe_ancestor, NodeId of) const {
  auto anc = ancestors(of);
  return std::binary_search(anc.begin(), anc.end(), maybe_ancestor);
}

bool CausalDiagram::d_separated(std::span<const NodeId> x, std::span<const NodeId> y,
                                std::span<const NodeId> z) const {
  const std::size_t n = nodes_.size();
  std::vector<int> role(n, 0);  // bit 1: x, bit 2: y, bit 4: z
  auto mark = [&](std::span<const NodeId> set, int bit) {
    for (NodeId v : set) {
      if (index_of(v) >= n) throw Error(ErrorKind::Lookup, "unknown node index");
      if (role[index_of(v)] & ~bit)
        throw Error(ErrorKind::Argument, "d-separation sets must be disjoint ('" + name(v) +
                                             "' appears twice)");
      role[index_of(v)] |= bit;
    }
  };
  mark(x, 1);
  mark(y, 2);
  mark(z, 4);

  // Nodes that are in z or have a descendant in z: colliders there are open.
  std::vector<bool> z_or_anc(n, false);
  std::deque<NodeId> todo;
  for (NodeId v : z) {
    z_or_anc[index_of(v)] = true;
    todo.push_back(v);
  }
  while (!todo.empty()) {
    NodeId cur = todo.front();
    todo.pop_front();
    for (NodeId p : parents_[index_of(cur)]) {
      if (!z_or_anc[index_of(p)]) {
        z_or_anc[index_of(p)] = true;
        todo.push_back(p);
      }
    }
  }

  // Visit states: (node, arrived_from_child). Arriving "up" means we came from
  // a child of the node; "down" means from a parent.
  std::vector<std::array<bool, 2>> visited(n, {false, false});
  std::deque<std::pair<NodeId, bool>> frontier;
  for (NodeId v : x) frontier.emplace_back(v, true);
  while (!frontier.empty()) {
    auto [cur, up] = frontier.front();
    frontier.pop_front();
    auto& v = visited[index_of(cur)][up ? 1 : 0];
    if (v) continue;
    v = true;
    const bool in_z = role[index_of(cur)] & 4;
    if (!in_z && (role[index_of(cur)] & 2)) return false;
    if (up) {
      if (in_z) continue;
      for (NodeId p : parents_[index_of(cur)]) frontier.emplace_back(p, true);
      for (NodeId c : children_[index_of(cur)]) frontier.emplace_back(c, false);
    } else {
      if (!in_z)
        for (NodeId c : children_[index_of(cur)]) frontier.emplace_back(c, false);
      if (z_or_anc[index_of(cur)])
        for (NodeId p : parents_[index_of(cur)]) frontier.emplace_back(p, true);
    }
  }
  return true;
}

CausalDiagram CausalDiagram::without_edges(
    std::span<const std::pair<NodeId, NodeId>> removed) const {
  std::vector<std::pair<std::size_t, std::size_t>> kept;
  for (auto e : edges()) {
    if (std::find(removed.begin(), removed.end(), e) == removed.end())
      kept.emplace_back(index_of(e.first), index_of(e.second));
  }
  return from_indices(nodes_, kept);
}

std::vector<std::string> names_of(const CausalDiagram& d, std::span<const NodeId> ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (NodeId v : ids) out.push_back(d.name(v));
  return out;
}

}  // namespace cftwin
