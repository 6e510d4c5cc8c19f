#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/rational.hpp>

#include "tempnet/error.hpp"
#include "tempnet/model.hpp"
#include "tempnet/network.hpp"

namespace tempnet {

// Mixed comparisons with plain integers recurse forever in some Boost
// releases under C++20; convert to Rational first.
using Rational = boost::rational<std::int64_t>;
using VariableIndex = std::size_t;

/// x - y <= bound, or x - y < bound when strict.
struct DifferenceConstraint {
  VariableIndex x = 0;
  VariableIndex y = 0;
  std::int64_t bound = 0;
  bool strict = false;

  bool operator==(const DifferenceConstraint&) const = default;
};

struct Equality {
  VariableIndex x = 0;
  VariableIndex y = 0;

  bool operator==(const Equality&) const = default;
};

/// Difference constraints over named variables. Variable 0 is the origin,
/// pinned to year 0 in every witness.
class ConstraintSystem {
 public:
  static constexpr VariableIndex origin = 0;

  ConstraintSystem() : names_{"origin"} {}

  VariableIndex add_variable(std::string name) {
    names_.push_back(std::move(name));
    return names_.size() - 1;
  }

  std::size_t variable_count() const { return names_.size(); }
  const std::string& name(VariableIndex v) const { return names_.at(v); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<VariableIndex> find(std::string_view name) const {
    for (VariableIndex v = 0; v < names_.size(); ++v)
      if (names_[v] == name) return v;
    return std::nullopt;
  }

  void add(DifferenceConstraint c) {
    check(c.x);
    check(c.y);
    constraints_.push_back(c);
  }
  void add_less(VariableIndex x, VariableIndex y, std::int64_t bound) { add({x, y, bound, true}); }
  void add_at_most(VariableIndex x, VariableIndex y, std::int64_t bound) {
    add({x, y, bound, false});
  }
  void add_equality(VariableIndex x, VariableIndex y) {
    check(x);
    check(y);
    equalities_.push_back({x, y});
  }

  const std::vector<DifferenceConstraint>& constraints() const { return constraints_; }
  const std::vector<Equality>& equalities() const { return equalities_; }

 private:
  void check(VariableIndex v) const {
    if (v >= names_.size())
      throw std::out_of_range("constraint references undeclared variable " + std::to_string(v));
  }

  std::vector<std::string> names_;
  std::vector<DifferenceConstraint> constraints_;
  std::vector<Equality> equalities_;
};

struct Witness {
  std::vector<std::string> names;
  std::vector<Rational> times;

  std::optional<Rational> at(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return times[i];
    return std::nullopt;
  }

  bool operator==(const Witness&) const = default;
};

/// One arc of an infeasible cycle: head - tail <= bound (< when strict).
struct CycleStep {
  VariableIndex tail = 0;
  VariableIndex head = 0;
  std::int64_t bound = 0;
  bool strict = false;

  bool operator==(const CycleStep&) const = default;
};

/// A closed walk whose bounds sum below zero, or to zero through a strict arc.
struct InfeasibilityCertificate {
  std::vector<CycleStep> cycle;

  std::int64_t bound_sum() const {
    std::int64_t s = 0;
    for (const auto& c : cycle) s += c.bound;
    return s;
  }
  bool has_strict() const {
    return std::any_of(cycle.begin(), cycle.end(), [](const CycleStep& c) { return c.strict; });
  }

  bool operator==(const InfeasibilityCertificate&) const = default;
};

using FeasibilityResult = std::variant<Witness, InfeasibilityCertificate>;

// ---------------------------------------------------------------------------
// Intervals

/// (tau_min(parent(v)), tau_max(v)): where v-up can possibly lie.
inline Interval contact_interval(const Problem& problem, VertexIndex v) {
  const auto& phy = problem.phylogeny;
  if (v == phy.root())
    throw Error(ErrorKind::RootHasNoContactInterval, phy.name(v),
                "the root '" + phy.name(v) + "' has no contact interval");
  return Interval{problem.intervals.at(phy.parent(v)).lower, problem.intervals.at(v).upper};
}

inline bool intervals_overlap(const Interval& a, const Interval& b) {
  return std::max(a.lower, b.lower) < std::min(a.upper, b.upper);
}

// ---------------------------------------------------------------------------
// Constraint generation

/// Variables: origin, then every tree vertex (canonical order), then
/// "pre-<v>" for each up-vertex of the summary.
inline ConstraintSystem build_constraints(const Problem& problem, const Summary& summary) {
  const auto& phy = problem.phylogeny;
  for (const auto& c : summary.contacts())
    for (UpVertex u : {c.first, c.second}) {
      if (u.base >= phy.vertex_count())
        throw Error(ErrorKind::UnknownVertex, std::to_string(u.base),
                    "summary references an unknown vertex");
      if (u.base == phy.root())
        throw Error(ErrorKind::RootUpVertex, phy.name(u.base),
                    "the root '" + phy.name(u.base) + "' has no up-vertex");
    }

  ConstraintSystem sys;
  std::vector<VariableIndex> tree_var(phy.vertex_count());
  for (VertexIndex v = 0; v < phy.vertex_count(); ++v) tree_var[v] = sys.add_variable(phy.name(v));
  std::vector<VariableIndex> up_var(phy.vertex_count(), 0);
  for (VertexIndex v : summary.up_bases()) up_var[v] = sys.add_variable("pre-" + phy.name(v));

  const auto o = ConstraintSystem::origin;
  for (VertexIndex v = 0; v < phy.vertex_count(); ++v) {
    const Interval& iv = problem.intervals.at(v);
    if (iv.upper.is_finite()) sys.add_less(tree_var[v], o, iv.upper.value());
    if (iv.lower.is_finite()) sys.add_less(o, tree_var[v], -iv.lower.value());
  }
  for (VertexIndex v = 0; v < phy.vertex_count(); ++v)
    if (v != phy.root()) sys.add_less(tree_var[phy.parent(v)], tree_var[v], 0);
  for (VertexIndex v : summary.up_bases()) {
    sys.add_less(tree_var[phy.parent(v)], up_var[v], 0);
    sys.add_less(up_var[v], tree_var[v], 0);
  }
  for (const auto& c : summary.contacts())
    sys.add_equality(up_var[c.first.base], up_var[c.second.base]);
  return sys;
}

// ---------------------------------------------------------------------------
// Feasibility

namespace detail {

// A path length b - k*delta for an infinitesimal delta > 0 (k strict arcs).
struct Slack {
  std::int64_t bound = 0;
  std::int64_t strict = 0;

  Slack operator+(const Slack& o) const { return {bound + o.bound, strict + o.strict}; }
  bool operator<(const Slack& o) const {
    return bound < o.bound || (bound == o.bound && strict > o.strict);
  }
  bool negative() const { return bound < 0 || (bound == 0 && strict > 0); }
};

struct Arc {
  std::size_t from;
  std::size_t to;
  Slack weight;
  std::size_t constraint;
};

inline std::vector<std::size_t> equality_classes(const ConstraintSystem& sys, std::size_t& count) {
  std::vector<std::size_t> parent(sys.variable_count());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& e : sys.equalities()) {
    auto a = find(e.x), b = find(e.y);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> id(sys.variable_count(), no_node), cls(sys.variable_count());
  count = 0;
  for (std::size_t v = 0; v < sys.variable_count(); ++v) {
    auto r = find(v);
    if (id[r] == no_node) id[r] = count++;
    cls[v] = id[r];
  }
  return cls;
}

struct Relaxation {
  std::vector<Slack> dist;
  std::vector<std::size_t> pred;  // arc index, or no_node
  std::optional<std::size_t> cycle_vertex;
};

inline Relaxation bellman_ford(std::size_t nodes, const std::vector<Arc>& arcs) {
  Relaxation r{std::vector<Slack>(nodes), std::vector<std::size_t>(nodes, no_node), {}};
  // nodes + 1 passes: the all-zero start acts as a virtual source
  for (std::size_t pass = 0; pass <= nodes; ++pass) {
    std::optional<std::size_t> last;
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      const Arc& arc = arcs[a];
      Slack candidate = r.dist[arc.from] + arc.weight;
      if (candidate < r.dist[arc.to]) {
        r.dist[arc.to] = candidate;
        r.pred[arc.to] = a;
        last = arc.to;
      }
    }
    if (!last) return r;
    if (pass == nodes) r.cycle_vertex = last;
  }
  return r;
}

}  // namespace detail

/// True iff every constraint holds exactly (strict ones strictly).
inline bool verify_witness(const ConstraintSystem& sys, const Witness& w) {
  if (w.times.size() != sys.variable_count()) return false;
  for (const auto& c : sys.constraints()) {
    Rational diff = w.times[c.x] - w.times[c.y], bound(c.bound);
    if (c.strict ? !(diff < bound) : !(diff <= bound)) return false;
  }
  for (const auto& e : sys.equalities())
    if (w.times[e.x] != w.times[e.y]) return false;
  return w.times[ConstraintSystem::origin] == Rational(0);
}

/// True iff the cycle chains, every step is implied by a constraint or
/// equality of `sys`, and the sum is negative or zero with a strict step.
inline bool verify_certificate(const ConstraintSystem& sys, const InfeasibilityCertificate& cert) {
  if (cert.cycle.empty()) return false;
  for (std::size_t i = 0; i < cert.cycle.size(); ++i) {
    const auto& s = cert.cycle[i];
    const auto& next = cert.cycle[(i + 1) % cert.cycle.size()];
    if (s.head != next.tail) return false;
    bool backed = std::any_of(sys.constraints().begin(), sys.constraints().end(), [&](auto& c) {
      return c.x == s.head && c.y == s.tail && c.bound == s.bound && c.strict == s.strict;
    });
    if (!backed && s.bound == 0 && !s.strict)
      backed = std::any_of(sys.equalities().begin(), sys.equalities().end(), [&](auto& e) {
        return (e.x == s.head && e.y == s.tail) || (e.y == s.head && e.x == s.tail);
      });
    if (!backed) return false;
  }
  auto sum = cert.bound_sum();
  return sum < 0 || (sum == 0 && cert.has_strict());
}

/// Exact decision over the reals. Equalities are merged first; the rest is
/// shortest-path relaxation with (bound, strict-count) weights. A feasible
/// system yields the midpoint of its earliest and latest potential
/// solutions, which keeps strict constraints strict.
inline FeasibilityResult check_feasible(const ConstraintSystem& sys) {
  std::size_t classes = 0;
  auto cls = detail::equality_classes(sys, classes);

  std::vector<detail::Arc> arcs, reversed;
  for (std::size_t i = 0; i < sys.constraints().size(); ++i) {
    const auto& c = sys.constraints()[i];
    detail::Slack w{c.bound, c.strict ? 1 : 0};
    arcs.push_back({cls[c.y], cls[c.x], w, i});
    reversed.push_back({cls[c.x], cls[c.y], w, i});
  }

  auto latest = detail::bellman_ford(classes, arcs);
  if (latest.cycle_vertex) {
    std::size_t v = *latest.cycle_vertex;
    for (std::size_t i = 0; i < classes; ++i) {
      if (latest.pred[v] == no_node) throw std::logic_error("broken predecessor chain");
      v = arcs[latest.pred[v]].from;
    }
    std::vector<std::size_t> cycle_arcs;
    std::size_t u = v;
    do {
      std::size_t a = latest.pred[u];
      cycle_arcs.push_back(a);
      u = arcs[a].from;
    } while (u != v);
    std::reverse(cycle_arcs.begin(), cycle_arcs.end());

    // adjacency of the equality graph, for chaining within a class
    std::vector<std::vector<VariableIndex>> eq_adj(sys.variable_count());
    for (const auto& e : sys.equalities()) {
      eq_adj[e.x].push_back(e.y);
      eq_adj[e.y].push_back(e.x);
    }
    auto chain = [&](VariableIndex from, VariableIndex to, std::vector<CycleStep>& out) {
      if (from == to) return;
      std::vector<VariableIndex> prev(sys.variable_count(), no_node);
      std::deque<VariableIndex> queue{from};
      prev[from] = from;
      while (!queue.empty() && prev[to] == no_node) {
        auto x = queue.front();
        queue.pop_front();
        for (auto y : eq_adj[x])
          if (prev[y] == no_node) {
            prev[y] = x;
            queue.push_back(y);
          }
      }
      std::vector<CycleStep> path;
      for (auto x = to; x != from; x = prev[x]) path.push_back({prev[x], x, 0, false});
      out.insert(out.end(), path.rbegin(), path.rend());
    };

    InfeasibilityCertificate cert;
    for (std::size_t k = 0; k < cycle_arcs.size(); ++k) {
      const auto& c = sys.constraints()[arcs[cycle_arcs[k]].constraint];
      cert.cycle.push_back({c.y, c.x, c.bound, c.strict});
      const auto& next = sys.constraints()[arcs[cycle_arcs[(k + 1) % cycle_arcs.size()]].constraint];
      chain(c.x, next.y, cert.cycle);
    }
    if (!verify_certificate(sys, cert)) throw std::logic_error("invalid infeasibility certificate");
    return cert;
  }

  auto earliest = detail::bellman_ford(classes, reversed);
  if (earliest.cycle_vertex) throw std::logic_error("transposed system disagrees on feasibility");

  const Rational eps(1, static_cast<std::int64_t>(sys.variable_count()) + 1);
  auto late = [&](std::size_t c) {
    return Rational(latest.dist[c].bound) - eps * Rational(latest.dist[c].strict);
  };
  auto early = [&](std::size_t c) {
    return Rational(-earliest.dist[c].bound) + eps * Rational(earliest.dist[c].strict);
  };
  const std::size_t o = cls[ConstraintSystem::origin];
  const Rational late_shift = late(o), early_shift = early(o);

  Witness w{sys.names(), std::vector<Rational>(sys.variable_count())};
  for (VariableIndex v = 0; v < sys.variable_count(); ++v)
    w.times[v] = ((late(cls[v]) - late_shift) + (early(cls[v]) - early_shift)) / Rational(2);
  if (!verify_witness(sys, w)) throw std::logic_error("witness fails its own constraint system");
  return w;
}

inline bool is_feasible(const FeasibilityResult& r) { return std::holds_alternative<Witness>(r); }

// ---------------------------------------------------------------------------
// Cycle-enumeration oracle

inline constexpr std::size_t default_feasibility_oracle_limit = 8;

/// Decides feasibility by enumerating every simple cycle of the merged
/// constraint graph and testing the negative / zero-with-strict criterion.
inline bool oracle_feasible(const ConstraintSystem& sys,
                            std::size_t limit = default_feasibility_oracle_limit) {
  // merge equalities by repeated min-label propagation
  std::vector<std::size_t> label(sys.variable_count());
  std::iota(label.begin(), label.end(), 0);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& e : sys.equalities()) {
      auto m = std::min(label[e.x], label[e.y]);
      if (label[e.x] != m || label[e.y] != m) {
        label[e.x] = label[e.y] = m;
        changed = true;
      }
    }
  }
  std::vector<std::size_t> id(sys.variable_count(), no_node);
  std::size_t n = 0;
  for (std::size_t v = 0; v < sys.variable_count(); ++v)
    if (id[label[v]] == no_node) id[label[v]] = n++;
  if (n > limit)
    throw Error(ErrorKind::InstanceTooLarge, std::to_string(n),
                std::to_string(n) + " merged variables exceed the oracle limit " +
                    std::to_string(limit));

  using detail::Slack;
  std::vector<std::vector<std::optional<Slack>>> best(n, std::vector<std::optional<Slack>>(n));
  for (const auto& c : sys.constraints()) {
    std::size_t from = id[label[c.y]], to = id[label[c.x]];
    Slack w{c.bound, c.strict ? 1 : 0};
    if (!best[from][to] || w < *best[from][to]) best[from][to] = w;
  }
  for (std::size_t v = 0; v < n; ++v)
    if (best[v][v] && best[v][v]->negative()) return false;

  // cycles are enumerated from their smallest vertex
  std::vector<bool> on_path(n, false);
  auto dfs = [&](auto&& self, std::size_t start, std::size_t v, Slack acc) -> bool {
    for (std::size_t w = start; w < n; ++w) {
      if (!best[v][w] || w == v) continue;
      Slack next = acc + *best[v][w];
      if (w == start) {
        if (next.negative()) return true;
      } else if (!on_path[w]) {
        on_path[w] = true;
        bool found = self(self, start, w, next);
        on_path[w] = false;
        if (found) return true;
      }
    }
    return false;
  };
  for (std::size_t s = 0; s < n; ++s) {
    on_path[s] = true;
    bool negative = dfs(dfs, s, s, Slack{});
    on_path[s] = false;
    if (negative) return false;
  }
  return true;
}

}  // namespace tempnet
