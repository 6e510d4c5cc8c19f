#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "tempnet/error.hpp"
#include "tempnet/model.hpp"
#include "tempnet/network.hpp"
#include "tempnet/solver.hpp"
#include "tempnet/temporal.hpp"

namespace tempnet {

// ---------------------------------------------------------------------------
// Problem documents
//
//   %phylogeny
//   root <vertex>
//   edge <parent> <child>
//   %characters
//   character <name> states <s1> <s2> ...
//   label <leaf> <character> <state-or-?>
//   %intervals
//   interval <vertex> <lo|-inf> <hi|+inf>
//   %constraints
//   forbid <vertex> <vertex>
//   %options
//   max-contacts <k>
//
// '#' starts a comment. A '?' cell becomes a fresh state "?<leaf>" that
// no other leaf carries.

struct DocumentRecord {
  std::size_t line = 0;
  std::string section;
  std::vector<std::string> tokens;
};

struct SectionHeader {
  std::size_t line = 0;
  std::string name;
};

struct ProblemDocument {
  std::string source;
  std::vector<SectionHeader> sections;
  std::vector<DocumentRecord> records;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>, std::less<>>& directive_table() {
  static const std::map<std::string, std::set<std::string>, std::less<>> table{
      {"phylogeny", {"root", "edge"}},
      {"characters", {"character", "label"}},
      {"intervals", {"interval"}},
      {"constraints", {"forbid"}},
      {"options", {"max-contacts"}},
  };
  return table;
}

inline std::optional<std::int64_t> parse_integer(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

/// Syntax-level parse of one file; no cross-record validation.
inline ProblemDocument parse_document(std::string_view text, std::string source = {}) {
  ProblemDocument doc;
  doc.source = std::move(source);
  auto fail = [&](std::size_t line, const std::string& msg) {
    throw ParseError(ErrorKind::SyntaxError, doc.source, line, "", msg);
  };

  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = detail::tokenize(line);
    if (tokens.empty()) continue;

    if (tokens[0].starts_with('%')) {
      std::string name = tokens[0].substr(1);
      if (!detail::directive_table().contains(name)) fail(line_no, "unknown section '" + tokens[0] + "'");
      if (tokens.size() != 1) fail(line_no, "unexpected text after section header");
      section = name;
      doc.sections.push_back({line_no, name});
      continue;
    }
    if (section.empty()) fail(line_no, "directive '" + tokens[0] + "' outside of any section");
    const auto& allowed = detail::directive_table().find(section)->second;
    const std::string& d = tokens[0];
    if (!allowed.contains(d))
      fail(line_no, "directive '" + d + "' is not valid in section %" + section);

    auto arity = [&](std::size_t n, const char* usage) {
      if (tokens.size() != n) fail(line_no, std::string("expected: ") + usage);
    };
    if (d == "root") {
      arity(2, "root <vertex>");
    } else if (d == "edge") {
      arity(3, "edge <parent> <child>");
    } else if (d == "character") {
      if (tokens.size() < 3 || tokens[2] != "states")
        fail(line_no, "expected: character <name> states <s1> <s2> ...");
      for (std::size_t i = 3; i < tokens.size(); ++i)
        if (tokens[i].starts_with('?'))
          fail(line_no, "state names starting with '?' are reserved for blank cells");
    } else if (d == "label") {
      arity(4, "label <leaf> <character> <state-or-?>");
    } else if (d == "interval") {
      arity(4, "interval <vertex> <lo|-inf> <hi|+inf>");
      if (tokens[2] != "-inf" && !detail::parse_integer(tokens[2]))
        fail(line_no, "lower bound must be an integer year or -inf, got '" + tokens[2] + "'");
      if (tokens[3] != "+inf" && !detail::parse_integer(tokens[3]))
        fail(line_no, "upper bound must be an integer year or +inf, got '" + tokens[3] + "'");
    } else if (d == "forbid") {
      arity(3, "forbid <vertex> <vertex>");
    } else if (d == "max-contacts") {
      arity(2, "max-contacts <k>");
      auto k = detail::parse_integer(tokens[1]);
      if (!k || *k < 0) fail(line_no, "max-contacts needs a nonnegative integer");
    }
    doc.records.push_back({line_no, section, std::move(tokens)});
  }
  return doc;
}

namespace detail {

struct Located {
  const ProblemDocument* doc;
  const DocumentRecord* record;
};

inline ExtendedYear parse_year(const std::string& token) {
  if (token == "-inf") return ExtendedYear::negative_infinity();
  if (token == "+inf") return ExtendedYear::positive_infinity();
  return ExtendedYear::year(*parse_integer(token));
}

}  // namespace detail

/// Merges documents in order and validates the result into a Problem.
inline Problem build_problem(std::span<const ProblemDocument> docs) {
  using detail::Located;
  std::vector<Located> all;
  for (const auto& d : docs)
    for (const auto& r : d.records) all.push_back({&d, &r});

  auto fail_at = [](const Located& at, ErrorKind kind, const std::string& subject,
                    const std::string& msg) -> ParseError {
    return ParseError(kind, at.doc->source, at.record->line, subject, msg);
  };
  auto directive = [&](std::string_view d) {
    std::vector<Located> out;
    for (const auto& l : all)
      if (l.record->tokens[0] == d) out.push_back(l);
    return out;
  };

  auto roots = directive("root");
  if (roots.empty()) {
    // point at the %phylogeny header when there is one
    auto header = [&]() -> std::pair<std::string, std::size_t> {
      for (const auto& d : docs)
        for (const auto& s : d.sections)
          if (s.name == "phylogeny") return {d.source, s.line};
      return {docs.empty() ? std::string() : docs.front().source, 1};
    }();
    throw ParseError(ErrorKind::SyntaxError, header.first, header.second, "root",
                     "missing 'root' directive in %phylogeny");
  }
  if (roots.size() > 1)
    throw fail_at(roots[1], ErrorKind::SyntaxError, "root", "duplicate 'root' directive");
  const std::string& root_name = roots[0].record->tokens[1];

  std::vector<std::string> vertices{root_name};
  std::vector<RawEdge> edges;
  auto edge_records = directive("edge");
  for (const auto& l : edge_records) {
    const auto& t = l.record->tokens;
    vertices.push_back(t[1]);
    vertices.push_back(t[2]);
    edges.push_back({t[1], t[2]});
  }

  std::vector<RawCharacter> characters;
  auto char_records = directive("character");
  for (const auto& l : char_records) {
    const auto& t = l.record->tokens;
    characters.push_back({t[1], std::vector<std::string>(t.begin() + 3, t.end())});
  }
  std::vector<RawLabel> labels;
  auto label_records = directive("label");
  for (const auto& l : label_records) {
    const auto& t = l.record->tokens;
    std::string state = t[3];
    if (state == "?") {
      state = "?" + t[1];
      for (auto& c : characters)
        if (c.name == t[2]) c.states.push_back(state);
    }
    labels.push_back({t[1], t[2], state});
  }

  // Maps a validation error back to the record that caused it.
  auto locate = [&](const Error& e) -> Located {
    const std::string& s = e.subject();
    auto first = [&](const std::vector<Located>& recs, auto&& pred) -> std::optional<Located> {
      for (const auto& l : recs)
        if (pred(l.record->tokens)) return l;
      return std::nullopt;
    };
    std::optional<Located> hit;
    switch (e.kind()) {
      case ErrorKind::InDegreeViolation: {
        std::size_t seen = 0;
        hit = first(edge_records, [&](auto& t) { return t[2] == s && ++seen == 2; });
        if (!hit) hit = first(edge_records, [&](auto& t) { return t[2] == s; });
        break;
      }
      case ErrorKind::UnreachableVertex:
        hit = first(edge_records, [&](auto& t) { return t[1] == s || t[2] == s; });
        break;
      case ErrorKind::MultipleRoots: {
        // the first edge hanging below a root other than the declared one
        const std::string& declared = roots[0].record->tokens[1];
        std::set<std::string> extra;
        std::istringstream names(s);
        for (std::string n; std::getline(names >> std::ws, n, ',');)
          if (n != declared) extra.insert(n);
        hit = first(edge_records, [&](auto& t) { return extra.contains(t[1]); });
        if (!hit) hit = roots[0];
        break;
      }
      case ErrorKind::NoRoot:
        hit = roots[0];
        break;
      case ErrorKind::DuplicateCharacter: {
        std::size_t seen = 0;
        hit = first(char_records, [&](auto& t) { return t[1] == s && ++seen == 2; });
        break;
      }
      case ErrorKind::MissingLeafLabel: {
        auto slash = s.rfind('/');
        std::string ch = slash == std::string::npos ? s : s.substr(slash + 1);
        hit = first(char_records, [&](auto& t) { return t[1] == ch; });
        break;
      }
      case ErrorKind::UnknownCharacter:
        hit = first(label_records, [&](auto& t) { return t[2] == s; });
        break;
      case ErrorKind::UnknownVertex:
      case ErrorKind::LabelOnInternalVertex:
        hit = first(label_records, [&](auto& t) { return t[1] == s; });
        break;
      case ErrorKind::DuplicateLabel: {
        std::map<std::string, int> count;
        hit = first(label_records,
                    [&](auto& t) { return t[1] == s && ++count[t[2]] == 2; });
        break;
      }
      case ErrorKind::UnknownState:
        hit = first(label_records, [&](auto& t) { return t[3] == s; });
        break;
      default:
        break;
    }
    return hit.value_or(roots[0]);
  };

  Phylogeny phylogeny;
  try {
    phylogeny = validate_phylogeny(vertices, edges, characters, labels);
  } catch (const Error& e) {
    throw fail_at(locate(e), e.kind(), e.subject(), e.what());
  }
  if (phylogeny.name(phylogeny.root()) != root_name)
    throw fail_at(roots[0], ErrorKind::InDegreeViolation, root_name,
                  "declared root '" + root_name + "' has a parent; the tree's root is '" +
                      phylogeny.name(phylogeny.root()) + "'");

  auto vertex_at = [&](const Located& l, const std::string& name) {
    auto v = phylogeny.find(name);
    if (!v)
      throw fail_at(l, ErrorKind::UnknownVertex, name, "unknown vertex '" + name + "'");
    return *v;
  };

  TimeIntervals intervals(phylogeny.vertex_count());
  std::vector<bool> has_interval(phylogeny.vertex_count(), false);
  for (const auto& l : directive("interval")) {
    const auto& t = l.record->tokens;
    VertexIndex v = vertex_at(l, t[1]);
    if (has_interval[v])
      throw fail_at(l, ErrorKind::SyntaxError, t[1], "second interval for vertex '" + t[1] + "'");
    has_interval[v] = true;
    try {
      intervals.set(v, Interval{detail::parse_year(t[2]), detail::parse_year(t[3])}, t[1]);
    } catch (const Error& e) {
      throw fail_at(l, e.kind(), e.subject(), e.what());
    }
  }

  std::set<VertexPair> forbidden;
  for (const auto& l : directive("forbid")) {
    const auto& t = l.record->tokens;
    VertexIndex a = vertex_at(l, t[1]), b = vertex_at(l, t[2]);
    if (a == b)
      throw fail_at(l, ErrorKind::InvalidForbid, t[1], "forbid needs two distinct vertices");
    for (VertexIndex v : {a, b})
      if (v == phylogeny.root())
        throw fail_at(l, ErrorKind::InvalidForbid, phylogeny.name(v),
                      "the root '" + phylogeny.name(v) + "' cannot take part in a contact");
    forbidden.insert(ordered_pair(a, b));
  }

  std::size_t max_contacts = 0;
  auto options = directive("max-contacts");
  if (options.size() > 1)
    throw fail_at(options[1], ErrorKind::SyntaxError, "max-contacts",
                  "duplicate 'max-contacts' option");
  if (!options.empty())
    max_contacts = static_cast<std::size_t>(*detail::parse_integer(options[0].record->tokens[1]));

  return make_problem(std::move(phylogeny), std::move(intervals), std::move(forbidden),
                      max_contacts);
}

inline Problem parse_problem(std::string_view text, std::string source = {}) {
  ProblemDocument doc = parse_document(text, std::move(source));
  return build_problem(std::span<const ProblemDocument>(&doc, 1));
}

/// Canonical text form; parse_problem(serialize_problem(p)) == p.
inline std::string serialize_problem(const Problem& problem) {
  const auto& phy = problem.phylogeny;
  std::ostringstream out;
  out << "%phylogeny\nroot " << phy.name(phy.root()) << "\n";
  for (VertexIndex v = 0; v < phy.vertex_count(); ++v)
    if (v != phy.root()) out << "edge " << phy.name(phy.parent(v)) << " " << phy.name(v) << "\n";
  out << "%characters\n";
  for (CharacterIndex c = 0; c < phy.character_count(); ++c) {
    const auto& ch = phy.characters()[c];
    out << "character " << ch.name << " states";
    for (const auto& s : ch.states)
      if (!s.starts_with('?')) out << " " << s;
    out << "\n";
    for (VertexIndex leaf : phy.leaves()) {
      const auto& s = ch.states[phy.leaf_state(c, leaf)];
      out << "label " << phy.name(leaf) << " " << ch.name << " " << (s.starts_with('?') ? "?" : s)
          << "\n";
    }
  }
  out << "%intervals\n";
  for (VertexIndex v = 0; v < phy.vertex_count(); ++v) {
    const auto& iv = problem.intervals.at(v);
    if (iv == Interval{}) continue;
    out << "interval " << phy.name(v) << " " << iv.lower.to_string() << " "
        << iv.upper.to_string() << "\n";
  }
  out << "%constraints\n";
  for (auto [a, b] : problem.forbidden)
    out << "forbid " << phy.name(a) << " " << phy.name(b) << "\n";
  out << "%options\nmax-contacts " << problem.max_contacts << "\n";
  return out.str();
}

/// Contacts written as "child1:child2" with base vertex names.
inline Summary parse_contacts(const Phylogeny& phylogeny, std::span<const std::string> specs) {
  std::vector<Contact> contacts;
  for (const auto& spec : specs) {
    auto colon = spec.find(':');
    if (colon == std::string::npos || spec.find(':', colon + 1) != std::string::npos)
      throw Error(ErrorKind::SyntaxError, spec,
                  "contact '" + spec + "' must be written <vertex>:<vertex>");
    VertexIndex ends[2];
    std::string names[2] = {spec.substr(0, colon), spec.substr(colon + 1)};
    for (int i = 0; i < 2; ++i) {
      auto v = phylogeny.find(names[i]);
      if (!v)
        throw Error(ErrorKind::UnknownVertex, names[i], "unknown vertex '" + names[i] + "'");
      if (*v == phylogeny.root())
        throw Error(ErrorKind::RootUpVertex, names[i],
                    "the root '" + names[i] + "' has no up-vertex");
      ends[i] = *v;
    }
    if (ends[0] == ends[1])
      throw Error(ErrorKind::SelfContact, names[0], "contact '" + spec + "' joins a vertex to itself");
    contacts.emplace_back(ends[0], ends[1]);
  }
  return Summary(std::move(contacts));
}

// ---------------------------------------------------------------------------
// Reports

enum class ReportFormat { json, text };

inline ReportFormat parse_format(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "text") return ReportFormat::text;
  throw Error(ErrorKind::UnknownFormat, std::string(name),
              "unknown report format '" + std::string(name) + "'");
}

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::minimum: return "minimum";
    case Mode::all: return "all";
    case Mode::subset_minimal: return "subset-minimal";
  }
  return "minimum";
}

inline std::string_view to_string(MinimalityBasis b) {
  return b == MinimalityBasis::passing ? "passing" : "admissible";
}

inline std::string format_rational(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline std::string format_decimal(const Rational& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f",
                static_cast<double>(r.numerator()) / static_cast<double>(r.denominator()));
  return buf;
}

inline std::string contact_text(const Phylogeny& phy, const Contact& c) {
  return "pre-" + phy.name(c.first.base) + " -- pre-" + phy.name(c.second.base);
}

inline std::string summary_text(const Phylogeny& phy, const Summary& s) {
  if (s.empty()) return "(no contacts)";
  std::string out;
  for (const auto& c : s.contacts()) out += (out.empty() ? "" : "; ") + contact_text(phy, c);
  return out;
}

struct RenderOptions {
  bool timing = false;  // elapsed time varies between runs
};

namespace detail {

inline nlohmann::ordered_json solution_json(const Problem& problem, const Solution& s) {
  const auto& phy = problem.phylogeny;
  nlohmann::ordered_json j;
  j["contacts"] = nlohmann::ordered_json::array();
  for (const auto& c : s.summary.contacts())
    j["contacts"].push_back({phy.name(c.first.base), phy.name(c.second.base)});

  Network net = build_network(phy, s.summary);
  nlohmann::ordered_json labeling = nlohmann::ordered_json::object();
  for (CharacterIndex c = 0; c < phy.character_count(); ++c) {
    nlohmann::ordered_json g = nlohmann::ordered_json::object();
    for (NodeIndex i = 0; i < net.node_count(); ++i)
      g[net.node_name(i)] = phy.characters()[c].states[s.labeling.states[c][i]];
    labeling[phy.characters()[c].name] = std::move(g);
  }
  nlohmann::ordered_json witness = nlohmann::ordered_json::object();
  for (std::size_t v = 0; v < s.witness.names.size(); ++v)
    if (v != ConstraintSystem::origin) witness[s.witness.names[v]] = format_rational(s.witness.times[v]);
  j["witness"] = std::move(witness);
  j["labeling"] = std::move(labeling);
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const Problem& problem, const SolveReport& report,
                                          RenderOptions options = {}) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(report.mode);
  j["max_contacts"] = report.max_contacts;
  j["cardinality"] = report.cardinality ? nlohmann::ordered_json(*report.cardinality) : nullptr;
  j["minimality"] = to_string(report.minimality);
  j["minimum_cardinality"] =
      report.minimum_cardinality ? nlohmann::ordered_json(*report.minimum_cardinality) : nullptr;
  j["solutions"] = nlohmann::ordered_json::array();
  for (const auto& s : report.solutions) j["solutions"].push_back(detail::solution_json(problem, s));
  const auto& c = report.counts;
  j["counts"] = {
      {"solutions", report.solutions.size()},
      {"not_admissible", c.not_admissible},
      {"temporally_infeasible", c.temporally_infeasible},
      {"admissible_rejected_by_temporal", c.admissible_rejected_by_temporal},
      {"non_minimal", c.non_minimal},
      {"pruned_forbidden", c.pruned_forbidden},
      {"pruned_overlap", c.pruned_overlap},
  };
  j["stats"] = {{"candidates_examined", c.candidates_examined}};
  if (options.timing)
    j["stats"]["elapsed_ms"] =
        std::chrono::duration<double, std::milli>(report.elapsed).count();
  return j;
}

inline std::string render_report(const Problem& problem, const SolveReport& report,
                                 ReportFormat format, RenderOptions options = {}) {
  if (format == ReportFormat::json) return report_json(problem, report, options).dump(2) + "\n";

  const auto& phy = problem.phylogeny;
  const auto& c = report.counts;
  std::ostringstream out;
  out << "mode: " << to_string(report.mode);
  if (report.cardinality)
    out << " (cardinality " << *report.cardinality << ", relative to "
        << to_string(report.minimality) << " subsets)";
  out << "\nmax contacts: " << report.max_contacts << "\n";
  out << "minimum cardinality: "
      << (report.minimum_cardinality ? std::to_string(*report.minimum_cardinality) : "none")
      << "\n";
  out << "solutions: " << report.solutions.size() << "\n";
  for (std::size_t i = 0; i < report.solutions.size(); ++i) {
    const auto& s = report.solutions[i];
    out << "  [" << i + 1 << "] " << summary_text(phy, s.summary) << "\n";
    for (const auto& ct : s.summary.contacts()) {
      auto t = *s.witness.at("pre-" + phy.name(ct.first.base));
      out << "      pre-" << phy.name(ct.first.base) << " = pre-" << phy.name(ct.second.base)
          << " at " << format_decimal(t) << " (" << format_rational(t) << ")\n";
    }
  }
  out << "candidates examined: " << c.candidates_examined << "\n"
      << "not admissible: " << c.not_admissible << "\n"
      << "temporally infeasible: " << c.temporally_infeasible << "\n"
      << "admissible but rejected by timing: " << c.admissible_rejected_by_temporal << "\n"
      << "non-minimal: " << c.non_minimal << "\n"
      << "pruned (forbidden): " << c.pruned_forbidden << "\n"
      << "pruned (interval overlap): " << c.pruned_overlap << "\n";
  if (options.timing)
    out << "elapsed: " << std::chrono::duration<double, std::milli>(report.elapsed).count()
        << " ms\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// DOT export

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out;
}

inline std::string dot_quote(const std::string& s) { return "\"" + dot_escape(s) + "\""; }

}  // namespace detail

/// Tree edges as arrows, each contact as one undirected dashed edge.
inline std::string export_dot(const Network& net, const Labeling* labeling = nullptr) {
  const auto& phy = net.phylogeny();
  if (labeling) {
    bool ok = labeling->summary == net.summary() &&
              labeling->states.size() == phy.character_count();
    for (const auto& g : labeling->states) ok = ok && g.size() == net.node_count();
    if (!ok)
      throw Error(ErrorKind::LabelingMismatch, "",
                  "labeling was computed for a different network");
  }
  using detail::dot_quote;
  std::ostringstream out;
  out << "digraph network {\n  rankdir=TB;\n";
  for (NodeIndex i = 0; i < net.node_count(); ++i) {
    // lines joined by DOT's own "\n" escape
    std::string label = "\"" + detail::dot_escape(net.node_name(i));
    if (labeling)
      for (CharacterIndex c = 0; c < phy.character_count(); ++c)
        label += "\\n" + detail::dot_escape(phy.characters()[c].name + "=" +
                                            phy.characters()[c].states[labeling->states[c][i]]);
    label += "\"";
    out << "  " << dot_quote(net.node_name(i))
        << (net.node(i).up ? " [shape=point, label=\"\", xlabel=" : " [label=") << label
        << "];\n";
  }
  for (auto [a, b] : net.edges()) {
    if (net.node(a).up && net.node(b).up) continue;
    out << "  " << dot_quote(net.node_name(a)) << " -> " << dot_quote(net.node_name(b)) << ";\n";
  }
  for (const auto& c : net.summary().contacts())
    out << "  " << dot_quote(net.node_name(net.up_node(c.first.base))) << " -> "
        << dot_quote(net.node_name(net.up_node(c.second.base)))
        << " [dir=none, style=dashed, constraint=false];\n";
  out << "}\n";
  return out.str();
}

}  // namespace tempnet
