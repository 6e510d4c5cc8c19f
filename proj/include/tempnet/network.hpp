#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempnet/error.hpp"
#include "tempnet/model.hpp"

namespace tempnet {

using NodeIndex = std::size_t;
inline constexpr NodeIndex no_node = static_cast<NodeIndex>(-1);

/// An unordered pair {u-up, v-up}, stored with first < second.
struct Contact {
  UpVertex first;
  UpVertex second;

  Contact() = default;
  Contact(UpVertex a, UpVertex b) : first(std::min(a, b)), second(std::max(a, b)) {}
  Contact(VertexIndex a, VertexIndex b) : Contact(UpVertex{a}, UpVertex{b}) {}

  auto operator<=>(const Contact&) const = default;
};

/// A set of contacts with times erased. Contacts are kept sorted in
/// canonical order; several contacts may share one up-vertex.
class Summary {
 public:
  Summary() = default;

  explicit Summary(std::vector<Contact> contacts) : contacts_(std::move(contacts)) {
    for (const auto& c : contacts_)
      if (c.first == c.second)
        throw Error(ErrorKind::SelfContact, std::to_string(c.first.base),
                    "a contact must join two distinct up-vertices");
    std::sort(contacts_.begin(), contacts_.end());
    contacts_.erase(std::unique(contacts_.begin(), contacts_.end()), contacts_.end());
  }

  const std::vector<Contact>& contacts() const { return contacts_; }
  std::size_t size() const { return contacts_.size(); }
  bool empty() const { return contacts_.empty(); }

  /// Bases of the up-vertices occurring in the summary (V_X), sorted.
  std::vector<VertexIndex> up_bases() const {
    std::vector<VertexIndex> out;
    for (const auto& c : contacts_) {
      out.push_back(c.first.base);
      out.push_back(c.second.base);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool is_subset_of(const Summary& other) const {
    return std::includes(other.contacts_.begin(), other.contacts_.end(), contacts_.begin(),
                         contacts_.end());
  }

  auto operator<=>(const Summary&) const = default;

 private:
  std::vector<Contact> contacts_;
};

struct NetworkNode {
  VertexIndex base = no_vertex;
  bool up = false;  // true for base-up, false for the tree vertex itself

  auto operator<=>(const NetworkNode&) const = default;
};

class Network;
Network build_network(const Phylogeny& phylogeny, const Summary& summary);

/// The digraph <V u V_X, E_X>. Nodes are numbered in canonical order:
/// vertices lexicographically, with v-up immediately before v.
/// Keeps a pointer to its phylogeny, which must outlive it.
class Network {
 public:
  const Phylogeny& phylogeny() const { return *phylogeny_; }
  const Summary& summary() const { return summary_; }

  std::size_t node_count() const { return nodes_.size(); }
  const NetworkNode& node(NodeIndex i) const { return nodes_.at(i); }
  NodeIndex tree_node(VertexIndex v) const { return tree_node_.at(v); }
  /// no_node when v-up is not part of the network.
  NodeIndex up_node(VertexIndex v) const { return up_node_.at(v); }
  NodeIndex root_node() const { return tree_node_.at(phylogeny_->root()); }

  bool is_leaf_node(NodeIndex i) const {
    const auto& n = nodes_.at(i);
    return !n.up && phylogeny_->is_leaf(n.base);
  }

  std::string node_name(NodeIndex i) const {
    const auto& n = nodes_.at(i);
    return n.up ? "pre-" + phylogeny_->name(n.base) : phylogeny_->name(n.base);
  }

  const std::vector<NodeIndex>& out(NodeIndex i) const { return out_.at(i); }
  const std::vector<NodeIndex>& in(NodeIndex i) const { return in_.at(i); }

  /// All directed edges, sorted.
  const std::vector<std::pair<NodeIndex, NodeIndex>>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  bool has_edge(NodeIndex from, NodeIndex to) const {
    return std::binary_search(edges_.begin(), edges_.end(), std::pair{from, to});
  }

 private:
  friend Network build_network(const Phylogeny&, const Summary&);

  const Phylogeny* phylogeny_ = nullptr;
  Summary summary_;
  std::vector<NetworkNode> nodes_;
  std::vector<NodeIndex> tree_node_;
  std::vector<NodeIndex> up_node_;
  std::vector<std::vector<NodeIndex>> out_;
  std::vector<std::vector<NodeIndex>> in_;
  std::vector<std::pair<NodeIndex, NodeIndex>> edges_;
};

inline Network build_network(const Phylogeny& phylogeny, const Summary& summary) {
  const std::size_t n = phylogeny.vertex_count();
  for (const auto& c : summary.contacts())
    for (UpVertex u : {c.first, c.second}) {
      if (u.base >= n)
        throw Error(ErrorKind::UnknownVertex, std::to_string(u.base),
                    "summary references an unknown vertex");
      if (u.base == phylogeny.root())
        throw Error(ErrorKind::RootUpVertex, phylogeny.name(u.base),
                    "the root '" + phylogeny.name(u.base) + "' has no up-vertex");
    }

  Network net;
  net.phylogeny_ = &phylogeny;
  net.summary_ = summary;
  net.tree_node_.assign(n, no_node);
  net.up_node_.assign(n, no_node);

  std::vector<bool> in_vx(n, false);
  for (VertexIndex v : summary.up_bases()) in_vx[v] = true;

  for (VertexIndex v = 0; v < n; ++v) {
    if (in_vx[v]) {
      net.up_node_[v] = net.nodes_.size();
      net.nodes_.push_back({v, true});
    }
    net.tree_node_[v] = net.nodes_.size();
    net.nodes_.push_back({v, false});
  }

  for (VertexIndex v = 0; v < n; ++v) {
    if (v == phylogeny.root()) continue;
    NodeIndex p = net.tree_node_[phylogeny.parent(v)];
    if (in_vx[v]) {
      net.edges_.emplace_back(p, net.up_node_[v]);
      net.edges_.emplace_back(net.up_node_[v], net.tree_node_[v]);
    } else {
      net.edges_.emplace_back(p, net.tree_node_[v]);
    }
  }
  for (const auto& c : summary.contacts()) {
    NodeIndex a = net.up_node_[c.first.base];
    NodeIndex b = net.up_node_[c.second.base];
    net.edges_.emplace_back(a, b);
    net.edges_.emplace_back(b, a);
  }
  std::sort(net.edges_.begin(), net.edges_.end());

  net.out_.assign(net.nodes_.size(), {});
  net.in_.assign(net.nodes_.size(), {});
  for (auto [a, b] : net.edges_) {
    net.out_[a].push_back(b);
    net.in_[b].push_back(a);
  }
  for (auto& v : net.in_) std::sort(v.begin(), v.end());
  return net;
}

// ---------------------------------------------------------------------------
// Rooted spanning check

namespace detail {

/// Tarjan's algorithm restricted to the nodes where `member` is set.
/// Returns the component id of every member node (no_node elsewhere).
inline std::vector<std::size_t> induced_scc(const Network& net, const std::vector<bool>& member,
                                            std::size_t& component_count) {
  const std::size_t n = net.node_count();
  std::vector<std::size_t> index(n, no_node), low(n, 0), comp(n, no_node);
  std::vector<bool> on_stack(n, false);
  std::vector<NodeIndex> stack;
  std::size_t next_index = 0;
  component_count = 0;

  struct Frame {
    NodeIndex v;
    std::size_t edge;
  };
  for (NodeIndex start = 0; start < n; ++start) {
    if (!member[start] || index[start] != no_node) continue;
    std::vector<Frame> call{{start, 0}};
    index[start] = low[start] = next_index++;
    stack.push_back(start);
    on_stack[start] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& succ = net.out(f.v);
      if (f.edge < succ.size()) {
        NodeIndex w = succ[f.edge++];
        if (!member[w]) continue;
        if (index[w] == no_node) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      NodeIndex v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        NodeIndex w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = component_count;
        } while (w != v);
        ++component_count;
      }
    }
  }
  return comp;
}

}  // namespace detail

/// Some node of the subset from which every subset node is reachable inside
/// the induced subgraph, or nullopt. Decided on the condensation: such a node
/// exists iff there is exactly one source component and it reaches every
/// component. The smallest node of the source component is returned.
inline std::optional<NodeIndex> rooted_spanning_root(const Network& net,
                                                     const std::vector<bool>& member) {
  std::size_t members = static_cast<std::size_t>(std::count(member.begin(), member.end(), true));
  if (members == 0) throw Error(ErrorKind::EmptySubset, "", "vertex subset is empty");

  std::size_t count = 0;
  auto comp = detail::induced_scc(net, member, count);
  std::vector<bool> has_incoming(count, false);
  for (auto [a, b] : net.edges())
    if (member[a] && member[b] && comp[a] != comp[b]) has_incoming[comp[b]] = true;
  std::size_t sources = 0, source = no_node;
  for (std::size_t c = 0; c < count; ++c)
    if (!has_incoming[c]) {
      ++sources;
      source = c;
    }
  if (sources != 1) return std::nullopt;

  NodeIndex root = no_node;
  for (NodeIndex v = 0; v < net.node_count(); ++v)
    if (member[v] && comp[v] == source) {
      root = v;
      break;
    }

  std::vector<bool> seen(net.node_count(), false);
  std::vector<NodeIndex> stack{root};
  seen[root] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    NodeIndex v = stack.back();
    stack.pop_back();
    for (NodeIndex w : net.out(v))
      if (member[w] && !seen[w]) {
        seen[w] = true;
        ++reached;
        stack.push_back(w);
      }
  }
  if (reached != members) return std::nullopt;
  return root;
}

inline std::optional<NodeIndex> rooted_spanning_root(const Network& net,
                                                     std::span<const NodeIndex> subset) {
  std::vector<bool> member(net.node_count(), false);
  for (NodeIndex v : subset) member.at(v) = true;
  return rooted_spanning_root(net, member);
}

// ---------------------------------------------------------------------------
// Labelings

/// States of one character, indexed by network node.
using CharacterLabeling = std::vector<StateIndex>;

/// g : (V u V_X) x I -> S for one summary.
struct Labeling {
  Summary summary;
  std::vector<CharacterLabeling> states;  // [character][node]

  bool operator==(const Labeling&) const = default;
};

struct LabelingOptions {
  /// Reject partial assignments that already split a state class.
  bool prune = true;
};

namespace detail {

class LabelingSearch {
 public:
  LabelingSearch(const Network& net, CharacterIndex c, bool prune)
      : net_(net), character_(c), prune_(prune) {
    const auto& phy = net.phylogeny();
    state_count_ = phy.characters()[c].states.size();
    assign_.assign(net.node_count(), no_state);
    for (NodeIndex i = 0; i < net.node_count(); ++i)
      if (net.is_leaf_node(i)) assign_[i] = phy.leaf_state(c, net.node(i).base);

    // reverse breadth-first order from the root, internal nodes only
    std::vector<NodeIndex> bfs{net.root_node()};
    std::vector<bool> seen(net.node_count(), false);
    seen[net.root_node()] = true;
    for (std::size_t head = 0; head < bfs.size(); ++head)
      for (NodeIndex w : net.out(bfs[head]))
        if (!seen[w]) {
          seen[w] = true;
          bfs.push_back(w);
        }
    for (auto it = bfs.rbegin(); it != bfs.rend(); ++it)
      if (!net.is_leaf_node(*it)) order_.push_back(*it);
  }

  std::optional<CharacterLabeling> run() {
    if (prune_ && !joinable()) return std::nullopt;
    if (search(0)) return assign_;
    return std::nullopt;
  }

 private:
  bool search(std::size_t depth) {
    if (depth == order_.size()) return complete_ok();
    NodeIndex v = order_[depth];
    for (StateIndex s = 0; s < state_count_; ++s) {
      assign_[v] = s;
      if (prune_ && !joinable()) continue;
      if (search(depth + 1)) return true;
    }
    assign_[v] = no_state;
    return false;
  }

  bool complete_ok() const {
    std::vector<bool> member(net_.node_count());
    for (StateIndex s = 0; s < state_count_; ++s) {
      bool any = false;
      for (NodeIndex i = 0; i < net_.node_count(); ++i) {
        member[i] = assign_[i] == s;
        any = any || member[i];
      }
      if (any && !rooted_spanning_root(net_, member)) return false;
    }
    return true;
  }

  // For every state, all nodes settled to it must stay weakly connected
  // through nodes that are unsettled or settled to the same state.
  bool joinable() const {
    const std::size_t n = net_.node_count();
    std::vector<char> seen(n);
    std::vector<NodeIndex> stack;
    for (StateIndex s = 0; s < state_count_; ++s) {
      NodeIndex first = no_node;
      std::size_t settled = 0;
      for (NodeIndex i = 0; i < n; ++i)
        if (assign_[i] == s) {
          if (first == no_node) first = i;
          ++settled;
        }
      if (settled < 2) continue;
      std::fill(seen.begin(), seen.end(), 0);
      seen[first] = 1;
      stack.assign(1, first);
      std::size_t reached = 1;
      auto visit = [&](NodeIndex w) {
        if (seen[w] || (assign_[w] != s && assign_[w] != no_state)) return;
        seen[w] = 1;
        if (assign_[w] == s) ++reached;
        stack.push_back(w);
      };
      while (!stack.empty() && reached < settled) {
        NodeIndex v = stack.back();
        stack.pop_back();
        for (NodeIndex w : net_.out(v)) visit(w);
        for (NodeIndex w : net_.in(v)) visit(w);
      }
      if (reached < settled) return false;
    }
    return true;
  }

  const Network& net_;
  CharacterIndex character_;
  bool prune_;
  std::size_t state_count_ = 0;
  std::vector<NodeIndex> order_;
  CharacterLabeling assign_;
};

}  // namespace detail

/// Backtracking search for a labeling of one character whose every
/// nonempty state class has a rooted spanning tree.
inline std::optional<CharacterLabeling> find_character_labeling(const Network& net,
                                                                CharacterIndex character,
                                                                LabelingOptions options = {}) {
  if (character >= net.phylogeny().character_count())
    throw Error(ErrorKind::UnknownCharacter, std::to_string(character),
                "character index " + std::to_string(character) + " out of range");
  return detail::LabelingSearch(net, character, options.prune).run();
}

inline std::optional<Labeling> check_admissible(const Network& net, LabelingOptions options = {}) {
  Labeling out{net.summary(), {}};
  for (CharacterIndex c = 0; c < net.phylogeny().character_count(); ++c) {
    auto g = find_character_labeling(net, c, options);
    if (!g) return std::nullopt;
    out.states.push_back(std::move(*g));
  }
  return out;
}

inline std::optional<Labeling> check_admissible(const Phylogeny& phylogeny, const Summary& summary,
                                                LabelingOptions options = {}) {
  return check_admissible(build_network(phylogeny, summary), options);
}

/// True iff `labeling` extends the leaf data and every nonempty class of
/// every character passes rooted_spanning_root.
inline bool verify_labeling(const Network& net, const Labeling& labeling) {
  const auto& phy = net.phylogeny();
  if (labeling.summary != net.summary() || labeling.states.size() != phy.character_count())
    return false;
  for (CharacterIndex c = 0; c < phy.character_count(); ++c) {
    const auto& g = labeling.states[c];
    const std::size_t states = phy.characters()[c].states.size();
    if (g.size() != net.node_count()) return false;
    for (NodeIndex i = 0; i < net.node_count(); ++i) {
      if (g[i] >= states) return false;
      if (net.is_leaf_node(i) && g[i] != phy.leaf_state(c, net.node(i).base)) return false;
    }
    std::vector<bool> member(net.node_count());
    for (StateIndex s = 0; s < states; ++s) {
      bool any = false;
      for (NodeIndex i = 0; i < net.node_count(); ++i) {
        member[i] = g[i] == s;
        any = any || member[i];
      }
      if (any && !rooted_spanning_root(net, member)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

namespace detail {

// Plain per-candidate-root search; shares nothing with the SCC route.
inline bool class_has_root(const Network& net, const CharacterLabeling& g, StateIndex s) {
  std::vector<NodeIndex> cls;
  for (NodeIndex i = 0; i < net.node_count(); ++i)
    if (g[i] == s) cls.push_back(i);
  if (cls.empty()) return true;
  for (NodeIndex r : cls) {
    std::vector<bool> seen(net.node_count(), false);
    std::deque<NodeIndex> queue{r};
    seen[r] = true;
    std::size_t reached = 1;
    while (!queue.empty()) {
      NodeIndex v = queue.front();
      queue.pop_front();
      for (auto [a, b] : net.edges())
        if (a == v && g[b] == s && !seen[b]) {
          seen[b] = true;
          ++reached;
          queue.push_back(b);
        }
    }
    if (reached == cls.size()) return true;
  }
  return false;
}

}  // namespace detail

inline constexpr std::size_t default_admissibility_oracle_limit = 12;

/// Enumerates every assignment of states to the non-leaf network nodes,
/// first node most significant, and returns the first admissible one.
inline std::optional<Labeling> oracle_admissible(
    const Phylogeny& phylogeny, const Summary& summary,
    std::size_t limit = default_admissibility_oracle_limit) {
  Network net = build_network(phylogeny, summary);
  std::vector<NodeIndex> free;
  for (NodeIndex i = 0; i < net.node_count(); ++i)
    if (!net.is_leaf_node(i)) free.push_back(i);
  if (free.size() > limit)
    throw Error(ErrorKind::InstanceTooLarge, std::to_string(free.size()),
                std::to_string(free.size()) + " non-leaf network vertices exceed the oracle limit " +
                    std::to_string(limit));

  Labeling out{summary, {}};
  for (CharacterIndex c = 0; c < phylogeny.character_count(); ++c) {
    const std::size_t states = phylogeny.characters()[c].states.size();
    CharacterLabeling g(net.node_count(), 0);
    for (NodeIndex i = 0; i < net.node_count(); ++i)
      if (net.is_leaf_node(i)) g[i] = phylogeny.leaf_state(c, net.node(i).base);
    bool found = false;
    while (true) {
      bool ok = true;
      for (StateIndex s = 0; s < states && ok; ++s) ok = detail::class_has_root(net, g, s);
      if (ok) {
        found = true;
        break;
      }
      // odometer step, last free node least significant
      bool advanced = false;
      for (std::size_t k = free.size(); k-- > 0;) {
        if (++g[free[k]] < states) {
          advanced = true;
          break;
        }
        g[free[k]] = 0;
      }
      if (!advanced) break;
    }
    if (!found) return std::nullopt;
    out.states.push_back(std::move(g));
  }
  return out;
}

}  // namespace tempnet
