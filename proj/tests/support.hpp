#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tempnet/tempnet.hpp"

namespace tempnet::testing {

inline std::string data_path(const std::string& file) {
  return std::string(TEMPNET_DATA_DIR) + "/" + file;
}

inline std::string read_data(const std::string& file) {
  std::ifstream in(data_path(file), std::ios::binary);
  if (!in) throw std::runtime_error("missing data file " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Problem load(const std::string& file) { return parse_problem(read_data(file), file); }

inline Problem toy4() { return load("toy4.tnp"); }

inline VertexIndex vx(const Phylogeny& p, std::string_view name) {
  auto v = p.find(name);
  if (!v) throw std::runtime_error("no vertex " + std::string(name));
  return *v;
}

inline Contact contact(const Phylogeny& p, std::string_view a, std::string_view b) {
  return Contact(vx(p, a), vx(p, b));
}

inline Summary summary(const Phylogeny& p,
                       std::initializer_list<std::pair<const char*, const char*>> pairs) {
  std::vector<Contact> cs;
  for (auto [a, b] : pairs) cs.push_back(contact(p, a, b));
  return Summary(std::move(cs));
}

inline Interval interval(std::int64_t lo, std::int64_t hi) {
  return {ExtendedYear::year(lo), ExtendedYear::year(hi)};
}

// ---------------------------------------------------------------------------
// Random instances. Every generator takes the engine by reference so a
// suite seeded once is reproducible end to end.

using Rng = std::mt19937_64;

template <class T>
T uniform(Rng& rng, T lo, T hi) {
  return std::uniform_int_distribution<T>(lo, hi)(rng);
}

struct TreeShape {
  std::size_t min_vertices = 1;
  std::size_t max_vertices = 7;
  std::size_t max_characters = 3;
  std::size_t max_states = 3;
  bool bushy = false;  // parents only from the first half, so more leaves
};

/// Random rooted tree: vertex i > 0 hangs below a uniformly chosen
/// earlier vertex (from the first half of them when bushy). Names are
/// v0..vN; v0 is the root.
inline Phylogeny random_phylogeny(Rng& rng, TreeShape shape = {}) {
  std::size_t n = uniform(rng, shape.min_vertices, shape.max_vertices);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
  std::vector<RawEdge> edges;
  std::vector<bool> has_child(n, false);
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t parent = uniform<std::size_t>(rng, 0, shape.bushy ? (i - 1) / 2 : i - 1);
    edges.push_back({names[parent], names[i]});
    has_child[parent] = true;
  }
  std::size_t chars = uniform<std::size_t>(rng, 1, shape.max_characters);
  std::vector<RawCharacter> characters;
  std::vector<RawLabel> labels;
  for (std::size_t c = 0; c < chars; ++c) {
    std::size_t states = uniform<std::size_t>(rng, 2, shape.max_states);
    RawCharacter rc{"c" + std::to_string(c), {}};
    for (std::size_t s = 0; s < states; ++s) rc.states.push_back(std::to_string(s));
    for (std::size_t v = 0; v < n; ++v)
      if (!has_child[v])
        labels.push_back({names[v], rc.name, rc.states[uniform<std::size_t>(rng, 0, states - 1)]});
    characters.push_back(std::move(rc));
  }
  return validate_phylogeny(names, edges, characters, labels);
}

/// Intervals drawn independently inside [lo_year, hi_year]. With
/// `some_infinite`, about one bound in eight is left open.
inline TimeIntervals random_intervals(Rng& rng, const Phylogeny& p, bool some_infinite = true,
                                      std::int64_t lo_year = -5000, std::int64_t hi_year = 2500) {
  TimeIntervals t(p.vertex_count());
  for (VertexIndex v = 0; v < p.vertex_count(); ++v) {
    std::int64_t a = uniform(rng, lo_year, hi_year), b = uniform(rng, lo_year, hi_year);
    if (a == b) ++b;
    Interval iv = interval(std::min(a, b), std::max(a, b));
    if (some_infinite && uniform(rng, 0, 7) == 0) iv.lower = ExtendedYear::negative_infinity();
    if (some_infinite && uniform(rng, 0, 7) == 0) iv.upper = ExtendedYear::positive_infinity();
    t.set(v, iv, p.name(v));
  }
  return t;
}

/// Intervals that respect ancestry: each vertex is centred later than its
/// parent, so many contact sets are feasible.
inline TimeIntervals layered_intervals(Rng& rng, const Phylogeny& p) {
  TimeIntervals t(p.vertex_count());
  std::vector<std::int64_t> centre(p.vertex_count(), 0);
  std::vector<VertexIndex> order{p.root()};
  centre[p.root()] = -4000;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (auto c : p.children(order[i])) {
      centre[c] = centre[order[i]] + uniform<std::int64_t>(rng, 200, 1500);
      order.push_back(c);
    }
  for (VertexIndex v = 0; v < p.vertex_count(); ++v) {
    std::int64_t half = uniform<std::int64_t>(rng, 50, 700);
    t.set(v, interval(centre[v] - half, centre[v] + half), p.name(v));
  }
  return t;
}

inline Problem random_problem(Rng& rng, TreeShape shape = {}, bool layered = true,
                              std::size_t max_contacts = 2) {
  Phylogeny p = random_phylogeny(rng, shape);
  TimeIntervals t = layered ? layered_intervals(rng, p) : random_intervals(rng, p);
  return make_problem(std::move(p), std::move(t), {}, max_contacts);
}

inline std::vector<VertexIndex> non_root(const Phylogeny& p) {
  std::vector<VertexIndex> out;
  for (VertexIndex v = 0; v < p.vertex_count(); ++v)
    if (v != p.root()) out.push_back(v);
  return out;
}

/// Up to `max_size` random contacts over non-root vertices (fewer when the
/// tree is too small or a duplicate is drawn).
inline Summary random_summary(Rng& rng, const Phylogeny& p, std::size_t max_size) {
  auto bases = non_root(p);
  std::vector<Contact> cs;
  if (bases.size() < 2) return Summary();
  std::size_t k = uniform<std::size_t>(rng, 0, max_size);
  for (std::size_t i = 0; i < k; ++i) {
    auto a = bases[uniform<std::size_t>(rng, 0, bases.size() - 1)];
    auto b = bases[uniform<std::size_t>(rng, 0, bases.size() - 1)];
    if (a != b) cs.emplace_back(a, b);
  }
  return Summary(std::move(cs));
}

/// Random difference constraints over at most `max_vars` variables
/// (origin included). Bounds are small so zero-sum cycles are common.
inline ConstraintSystem random_system(Rng& rng, std::size_t max_vars = 8) {
  ConstraintSystem sys;
  std::size_t n = uniform<std::size_t>(rng, 1, max_vars);
  for (std::size_t i = 1; i < n; ++i) sys.add_variable("x" + std::to_string(i));
  std::size_t m = uniform<std::size_t>(rng, 0, 2 * n + 2);
  for (std::size_t i = 0; i < m; ++i) {
    auto x = uniform<std::size_t>(rng, 0, n - 1), y = uniform<std::size_t>(rng, 0, n - 1);
    if (x == y) continue;
    sys.add({x, y, uniform<std::int64_t>(rng, -4, 6), uniform(rng, 0, 1) == 1});
  }
  std::size_t e = uniform<std::size_t>(rng, 0, 2);
  for (std::size_t i = 0; i < e && n > 1; ++i) {
    auto x = uniform<std::size_t>(rng, 0, n - 1), y = uniform<std::size_t>(rng, 0, n - 1);
    if (x != y) sys.add_equality(x, y);
  }
  return sys;
}

}  // namespace tempnet::testing
