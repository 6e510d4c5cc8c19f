#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tempnet/error.hpp"

namespace tempnet {

// Vertices are numbered by rank in the lexicographic order of their
// identifiers, so index order is the canonical vertex order.
using VertexIndex = std::size_t;
using StateIndex = std::size_t;
using CharacterIndex = std::size_t;

inline constexpr VertexIndex no_vertex = std::numeric_limits<VertexIndex>::max();
inline constexpr StateIndex no_state = std::numeric_limits<StateIndex>::max();

struct RawEdge {
  std::string parent;
  std::string child;
};

struct RawCharacter {
  std::string name;
  std::vector<std::string> states;
};

struct RawLabel {
  std::string leaf;
  std::string character;
  std::string state;
};

struct Character {
  std::string name;
  std::vector<std::string> states;  // sorted, unique

  std::optional<StateIndex> find_state(std::string_view state) const {
    auto it = std::lower_bound(states.begin(), states.end(), state);
    if (it == states.end() || *it != state) return std::nullopt;
    return static_cast<StateIndex>(it - states.begin());
  }

  bool operator==(const Character&) const = default;
};

class Phylogeny;

Phylogeny validate_phylogeny(std::span<const std::string> vertices, std::span<const RawEdge> edges,
                             std::span<const RawCharacter> characters,
                             std::span<const RawLabel> labels);

/// A rooted tree with leaf character data. Immutable once validated.
class Phylogeny {
 public:
  std::size_t vertex_count() const { return names_.size(); }
  std::size_t edge_count() const { return names_.empty() ? 0 : names_.size() - 1; }
  const std::string& name(VertexIndex v) const { return names_.at(v); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<VertexIndex> find(std::string_view name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) return std::nullopt;
    return static_cast<VertexIndex>(it - names_.begin());
  }

  VertexIndex root() const { return root_; }
  /// no_vertex for the root.
  VertexIndex parent(VertexIndex v) const { return parent_.at(v); }
  const std::vector<VertexIndex>& children(VertexIndex v) const { return children_.at(v); }
  bool is_leaf(VertexIndex v) const { return children_.at(v).empty(); }
  const std::vector<VertexIndex>& leaves() const { return leaves_; }

  const std::vector<Character>& characters() const { return characters_; }
  std::size_t character_count() const { return characters_.size(); }

  std::optional<CharacterIndex> find_character(std::string_view name) const {
    for (CharacterIndex c = 0; c < characters_.size(); ++c)
      if (characters_[c].name == name) return c;
    return std::nullopt;
  }

  /// f(leaf, character); no_state for internal vertices.
  StateIndex leaf_state(CharacterIndex c, VertexIndex v) const { return leaf_state_.at(c).at(v); }

  std::vector<RawEdge> raw_edges() const {
    std::vector<RawEdge> out;
    for (VertexIndex v = 0; v < names_.size(); ++v)
      if (v != root_) out.push_back({names_[parent_[v]], names_[v]});
    return out;
  }

  std::vector<RawCharacter> raw_characters() const {
    std::vector<RawCharacter> out;
    for (const auto& c : characters_) out.push_back({c.name, c.states});
    return out;
  }

  std::vector<RawLabel> raw_labels() const {
    std::vector<RawLabel> out;
    for (CharacterIndex c = 0; c < characters_.size(); ++c)
      for (VertexIndex leaf : leaves_)
        out.push_back({names_[leaf], characters_[c].name,
                       characters_[c].states[leaf_state_[c][leaf]]});
    return out;
  }

  bool operator==(const Phylogeny&) const = default;

 private:
  friend Phylogeny validate_phylogeny(std::span<const std::string>, std::span<const RawEdge>,
                                      std::span<const RawCharacter>, std::span<const RawLabel>);

  std::vector<std::string> names_;
  VertexIndex root_ = no_vertex;
  std::vector<VertexIndex> parent_;
  std::vector<std::vector<VertexIndex>> children_;
  std::vector<VertexIndex> leaves_;
  std::vector<Character> characters_;
  std::vector<std::vector<StateIndex>> leaf_state_;
};

inline Phylogeny validate_phylogeny(std::span<const std::string> vertices,
                                    std::span<const RawEdge> edges,
                                    std::span<const RawCharacter> characters,
                                    std::span<const RawLabel> labels) {
  Phylogeny p;
  p.names_.assign(vertices.begin(), vertices.end());
  std::sort(p.names_.begin(), p.names_.end());
  p.names_.erase(std::unique(p.names_.begin(), p.names_.end()), p.names_.end());
  const std::size_t n = p.names_.size();
  if (n == 0) throw Error(ErrorKind::NoRoot, "", "phylogeny has no vertices");

  auto lookup = [&](const std::string& name) {
    auto v = p.find(name);
    if (!v) throw Error(ErrorKind::UnknownVertex, name, "unknown vertex '" + name + "'");
    return *v;
  };

  p.parent_.assign(n, no_vertex);
  p.children_.assign(n, {});
  std::vector<std::size_t> in_degree(n, 0);
  for (const auto& e : edges) {
    VertexIndex u = lookup(e.parent);
    VertexIndex v = lookup(e.child);
    ++in_degree[v];
    p.parent_[v] = u;
    p.children_[u].push_back(v);
  }
  for (VertexIndex v = 0; v < n; ++v)
    if (in_degree[v] > 1)
      throw Error(ErrorKind::InDegreeViolation, p.names_[v],
                  "vertex '" + p.names_[v] + "' has in-degree " + std::to_string(in_degree[v]));

  std::vector<VertexIndex> roots;
  for (VertexIndex v = 0; v < n; ++v)
    if (in_degree[v] == 0) roots.push_back(v);
  if (roots.empty()) throw Error(ErrorKind::NoRoot, "", "every vertex has a parent; no root");
  if (roots.size() > 1) {
    std::string who;
    for (VertexIndex r : roots) who += (who.empty() ? "" : ", ") + p.names_[r];
    throw Error(ErrorKind::MultipleRoots, who, "several vertices have in-degree 0: " + who);
  }
  p.root_ = roots.front();
  for (auto& ch : p.children_) std::sort(ch.begin(), ch.end());

  std::vector<bool> seen(n, false);
  std::vector<VertexIndex> stack{p.root_};
  seen[p.root_] = true;
  while (!stack.empty()) {
    VertexIndex u = stack.back();
    stack.pop_back();
    for (VertexIndex c : p.children_[u])
      if (!seen[c]) {
        seen[c] = true;
        stack.push_back(c);
      }
  }
  for (VertexIndex v = 0; v < n; ++v)
    if (!seen[v])
      throw Error(ErrorKind::UnreachableVertex, p.names_[v],
                  "vertex '" + p.names_[v] + "' is not reachable from the root");

  for (VertexIndex v = 0; v < n; ++v)
    if (p.children_[v].empty()) p.leaves_.push_back(v);

  for (const auto& rc : characters) {
    for (const auto& c : p.characters_)
      if (c.name == rc.name)
        throw Error(ErrorKind::DuplicateCharacter, rc.name,
                    "character '" + rc.name + "' declared twice");
    Character c{rc.name, rc.states};
    std::sort(c.states.begin(), c.states.end());
    c.states.erase(std::unique(c.states.begin(), c.states.end()), c.states.end());
    p.characters_.push_back(std::move(c));
  }

  p.leaf_state_.assign(p.characters_.size(), std::vector<StateIndex>(n, no_state));
  for (const auto& l : labels) {
    auto c = p.find_character(l.character);
    if (!c)
      throw Error(ErrorKind::UnknownCharacter, l.character,
                  "unknown character '" + l.character + "'");
    VertexIndex v = lookup(l.leaf);
    if (!p.is_leaf(v))
      throw Error(ErrorKind::LabelOnInternalVertex, l.leaf,
                  "vertex '" + l.leaf + "' is not a leaf but carries a label for '" +
                      l.character + "'");
    auto s = p.characters_[*c].find_state(l.state);
    if (!s)
      throw Error(ErrorKind::UnknownState, l.state,
                  "state '" + l.state + "' is not declared for character '" + l.character + "'");
    if (p.leaf_state_[*c][v] != no_state)
      throw Error(ErrorKind::DuplicateLabel, l.leaf,
                  "leaf '" + l.leaf + "' labeled twice for character '" + l.character + "'");
    p.leaf_state_[*c][v] = *s;
  }
  for (CharacterIndex c = 0; c < p.characters_.size(); ++c)
    for (VertexIndex leaf : p.leaves_)
      if (p.leaf_state_[c][leaf] == no_state)
        throw Error(ErrorKind::MissingLeafLabel, p.names_[leaf] + "/" + p.characters_[c].name,
                    "leaf '" + p.names_[leaf] + "' has no state for character '" +
                        p.characters_[c].name + "'");
  return p;
}

/// For each character, the states carried by at least two distinct leaves.
inline std::map<std::string, std::set<std::string>> essential_states(const Phylogeny& p) {
  std::map<std::string, std::set<std::string>> out;
  for (CharacterIndex c = 0; c < p.character_count(); ++c) {
    const Character& ch = p.characters()[c];
    std::vector<std::size_t> count(ch.states.size(), 0);
    for (VertexIndex leaf : p.leaves()) ++count[p.leaf_state(c, leaf)];
    auto& states = out[ch.name];
    for (StateIndex s = 0; s < count.size(); ++s)
      if (count[s] >= 2) states.insert(ch.states[s]);
  }
  return out;
}

/// Drops characters with fewer than two essential states.
inline Phylogeny drop_uninformative(const Phylogeny& p) {
  auto essential = essential_states(p);
  std::vector<RawCharacter> keep;
  std::vector<RawLabel> labels;
  for (const auto& c : p.raw_characters())
    if (essential[c.name].size() >= 2) keep.push_back(c);
  for (auto& l : p.raw_labels())
    if (essential[l.character].size() >= 2) labels.push_back(std::move(l));
  auto edges = p.raw_edges();
  return validate_phylogeny(p.names(), edges, keep, labels);
}

// ---------------------------------------------------------------------------
// Time

/// An integer year (negative = BCE) or one of the two infinities.
class ExtendedYear {
 public:
  enum class Kind : std::uint8_t { negative_infinity, finite, positive_infinity };

  constexpr ExtendedYear() = default;
  static constexpr ExtendedYear year(std::int64_t y) { return ExtendedYear(Kind::finite, y); }
  static constexpr ExtendedYear negative_infinity() {
    return ExtendedYear(Kind::negative_infinity, 0);
  }
  static constexpr ExtendedYear positive_infinity() {
    return ExtendedYear(Kind::positive_infinity, 0);
  }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_finite() const { return kind_ == Kind::finite; }
  constexpr std::int64_t value() const { return value_; }

  constexpr std::strong_ordering operator<=>(const ExtendedYear& o) const {
    if (auto c = kind_ <=> o.kind_; c != 0) return c;
    return value_ <=> o.value_;
  }
  constexpr bool operator==(const ExtendedYear&) const = default;

  std::string to_string() const {
    switch (kind_) {
      case Kind::negative_infinity: return "-inf";
      case Kind::positive_infinity: return "+inf";
      case Kind::finite: break;
    }
    return std::to_string(value_);
  }

 private:
  constexpr ExtendedYear(Kind k, std::int64_t v) : kind_(k), value_(v) {}

  Kind kind_ = Kind::finite;
  std::int64_t value_ = 0;
};

/// Open interval (lower, upper) of extended years.
struct Interval {
  ExtendedYear lower = ExtendedYear::negative_infinity();
  ExtendedYear upper = ExtendedYear::positive_infinity();

  bool operator==(const Interval&) const = default;
};

/// tau_min / tau_max per vertex; unset vertices are unbounded.
class TimeIntervals {
 public:
  TimeIntervals() = default;
  explicit TimeIntervals(std::size_t vertex_count) : bounds_(vertex_count) {}

  std::size_t size() const { return bounds_.size(); }
  const Interval& at(VertexIndex v) const { return bounds_.at(v); }

  void set(VertexIndex v, Interval iv, std::string_view vertex_name = {}) {
    if (!(iv.lower < iv.upper))
      throw Error(ErrorKind::EmptyInterval, std::string(vertex_name),
                  "interval (" + iv.lower.to_string() + ", " + iv.upper.to_string() +
                      ") for vertex '" + std::string(vertex_name) + "' is empty");
    bounds_.at(v) = iv;
  }

  bool operator==(const TimeIntervals&) const = default;

 private:
  std::vector<Interval> bounds_;
};

/// v-up: the unnamed intermediate language on the tree edge into `base`.
struct UpVertex {
  VertexIndex base = no_vertex;

  auto operator<=>(const UpVertex&) const = default;
};

using VertexPair = std::pair<VertexIndex, VertexIndex>;

inline VertexPair ordered_pair(VertexIndex a, VertexIndex b) {
  return a < b ? VertexPair{a, b} : VertexPair{b, a};
}

struct Problem {
  Phylogeny phylogeny;
  TimeIntervals intervals;
  std::set<VertexPair> forbidden;  // normalized first < second
  std::size_t max_contacts = 0;

  bool is_forbidden(VertexIndex a, VertexIndex b) const {
    return forbidden.contains(ordered_pair(a, b));
  }

  bool operator==(const Problem&) const = default;
};

inline Problem make_problem(Phylogeny phylogeny, TimeIntervals intervals,
                            std::set<VertexPair> forbidden, std::size_t max_contacts) {
  if (intervals.size() != phylogeny.vertex_count())
    throw Error(ErrorKind::UnknownVertex, "",
                "interval table does not match the phylogeny's vertex count");
  std::set<VertexPair> normalized;
  for (auto [a, b] : forbidden) {
    if (a >= phylogeny.vertex_count() || b >= phylogeny.vertex_count())
      throw Error(ErrorKind::InvalidForbid, "", "forbidden pair references an unknown vertex");
    if (a == b)
      throw Error(ErrorKind::InvalidForbid, phylogeny.name(a),
                  "forbidden pair repeats vertex '" + phylogeny.name(a) + "'");
    for (VertexIndex v : {a, b})
      if (v == phylogeny.root())
        throw Error(ErrorKind::InvalidForbid, phylogeny.name(v),
                    "forbidden pair references the root '" + phylogeny.name(v) + "'");
    normalized.insert(ordered_pair(a, b));
  }
  return Problem{std::move(phylogeny), std::move(intervals), std::move(normalized), max_contacts};
}

}  // namespace tempnet
