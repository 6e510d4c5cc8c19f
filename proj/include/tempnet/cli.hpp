#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tempnet/io.hpp"
#include "tempnet/model.hpp"
#include "tempnet/network.hpp"
#include "tempnet/solver.hpp"
#include "tempnet/temporal.hpp"

namespace tempnet {

namespace detail {

struct CliSettings {
  std::vector<std::string> files;
  std::optional<std::size_t> max_contacts;
  std::string mode = "minimum";
  std::optional<std::size_t> cardinality;
  std::string minimality = "passing";
  std::string format = "text";
  std::string dot_path;
  std::vector<std::string> contacts;
  bool no_prune = false;
  bool no_overlap_prefilter = false;
  bool temporal_first = false;
  bool oracle = false;
  bool timing = false;
  bool drop_uninformative = false;
  bool label = false;
  std::size_t workers = 1;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::SyntaxError, path, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Problem load_problem(const CliSettings& s) {
  std::vector<ProblemDocument> docs;
  for (const auto& f : s.files) docs.push_back(parse_document(read_file(f), f));
  Problem p = build_problem(docs);
  if (s.drop_uninformative) p.phylogeny = drop_uninformative(p.phylogeny);
  if (s.max_contacts) p.max_contacts = *s.max_contacts;
  return p;
}

inline CheckOptions check_options(const CliSettings& s) {
  CheckOptions o;
  o.prune = !s.no_prune;
  o.overlap_prefilter = !s.no_overlap_prefilter;
  o.temporal_first = s.temporal_first;
  o.use_oracles = s.oracle;
  return o;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::SyntaxError, path, "cannot write '" + path + "'");
  out << text;
}

inline std::string certificate_text(const ConstraintSystem& sys,
                                    const InfeasibilityCertificate& cert) {
  std::ostringstream out;
  for (const auto& step : cert.cycle)
    out << "  " << sys.name(step.head) << " - " << sys.name(step.tail)
        << (step.strict ? " < " : " <= ") << step.bound << "\n";
  out << "  sum of bounds " << cert.bound_sum() << (cert.has_strict() ? " with" : " without")
      << " a strict step\n";
  return out.str();
}

inline nlohmann::ordered_json certificate_json(const ConstraintSystem& sys,
                                               const InfeasibilityCertificate& cert) {
  auto cycle = nlohmann::ordered_json::array();
  for (const auto& step : cert.cycle)
    cycle.push_back({{"head", sys.name(step.head)},
                     {"tail", sys.name(step.tail)},
                     {"bound", step.bound},
                     {"strict", step.strict}});
  return cycle;
}

inline int run_solve(const CliSettings& s, std::ostream& out) {
  Problem problem = load_problem(s);
  SolveOptions opt;
  if (s.mode == "minimum") opt.mode = Mode::minimum;
  else if (s.mode == "all") opt.mode = Mode::all;
  else opt.mode = Mode::subset_minimal;
  opt.cardinality = s.cardinality;
  opt.minimality = s.minimality == "admissible" ? MinimalityBasis::admissible
                                                 : MinimalityBasis::passing;
  opt.workers = s.workers;
  opt.check = check_options(s);
  if (s.oracle) opt.check.feasibility_oracle_limit = 12;

  auto format = parse_format(s.format);
  SolveReport report = solve(problem, opt);
  out << render_report(problem, report, format, RenderOptions{s.timing});
  if (!s.dot_path.empty() && !report.solutions.empty()) {
    const auto& first = report.solutions.front();
    write_text_file(s.dot_path,
                    export_dot(build_network(problem.phylogeny, first.summary), &first.labeling));
  }
  return report.solutions.empty() ? 1 : 0;
}

inline int run_check(const CliSettings& s, std::ostream& out) {
  Problem problem = load_problem(s);
  Summary summary = parse_contacts(problem.phylogeny, s.contacts);
  auto opt = check_options(s);
  if (s.oracle) opt.feasibility_oracle_limit = 12;
  auto format = parse_format(s.format);
  auto result = check_summary(problem, summary, opt);
  const auto& phy = problem.phylogeny;

  if (auto* sol = std::get_if<Solution>(&result)) {
    if (format == ReportFormat::json) {
      nlohmann::ordered_json j;
      j["verdict"] = "solution";
      j["solution"] = detail::solution_json(problem, *sol);
      out << j.dump(2) << "\n";
    } else {
      out << "solution: " << summary_text(phy, summary) << "\n";
      for (std::size_t v = 1; v < sol->witness.names.size(); ++v)
        out << "  " << sol->witness.names[v] << " at " << format_decimal(sol->witness.times[v])
            << " (" << format_rational(sol->witness.times[v]) << ")\n";
    }
    if (!s.dot_path.empty())
      write_text_file(s.dot_path, export_dot(build_network(phy, summary), &sol->labeling));
    return 0;
  }
  const auto& rej = std::get<Rejection>(result);
  auto sys = build_constraints(problem, summary);
  if (format == ReportFormat::json) {
    nlohmann::ordered_json j;
    j["verdict"] = "rejected";
    j["reason"] = to_string(rej.kind);
    if (rej.contact)
      j["contact"] = {phy.name(rej.contact->first.base), phy.name(rej.contact->second.base)};
    if (rej.certificate) j["certificate"] = certificate_json(sys, *rej.certificate);
    out << j.dump(2) << "\n";
  } else {
    out << "rejected: " << to_string(rej.kind);
    if (rej.contact) out << " (" << contact_text(phy, *rej.contact) << ")";
    out << "\n";
    if (rej.certificate) out << certificate_text(sys, *rej.certificate);
  }
  return 1;
}

inline int run_filter(const CliSettings& s, std::ostream& out) {
  Problem problem = load_problem(s);
  Summary summary = parse_contacts(problem.phylogeny, s.contacts);
  auto format = parse_format(s.format);
  auto sys = build_constraints(problem, summary);
  auto result = check_feasible(sys);
  if (s.oracle && oracle_feasible(sys, 12) != is_feasible(result))
    throw std::logic_error("feasibility oracle disagrees with the shortest-path check");

  if (auto* w = std::get_if<Witness>(&result)) {
    if (format == ReportFormat::json) {
      nlohmann::ordered_json j;
      j["verdict"] = "feasible";
      nlohmann::ordered_json times = nlohmann::ordered_json::object();
      for (std::size_t v = 1; v < w->names.size(); ++v) times[w->names[v]] = format_rational(w->times[v]);
      j["witness"] = std::move(times);
      out << j.dump(2) << "\n";
    } else {
      out << "feasible\n";
      for (std::size_t v = 1; v < w->names.size(); ++v)
        out << "  " << w->names[v] << " at " << format_decimal(w->times[v]) << " ("
            << format_rational(w->times[v]) << ")\n";
    }
    return 0;
  }
  const auto& cert = std::get<InfeasibilityCertificate>(result);
  if (format == ReportFormat::json) {
    nlohmann::ordered_json j;
    j["verdict"] = "infeasible";
    j["certificate"] = certificate_json(sys, cert);
    out << j.dump(2) << "\n";
  } else {
    out << "infeasible\n" << certificate_text(sys, cert);
  }
  return 1;
}

inline int run_essential(const CliSettings& s, std::ostream& out) {
  Problem problem = load_problem(s);
  auto essential = essential_states(problem.phylogeny);
  if (parse_format(s.format) == ReportFormat::json) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& c : problem.phylogeny.characters())
      j[c.name] = std::vector<std::string>(essential[c.name].begin(), essential[c.name].end());
    out << j.dump(2) << "\n";
  } else {
    for (const auto& c : problem.phylogeny.characters()) {
      out << c.name << ":";
      for (const auto& st : essential[c.name]) out << " " << st;
      out << "\n";
    }
  }
  return 0;
}

inline int run_export_dot(const CliSettings& s, std::ostream& out, std::ostream& err) {
  Problem problem = load_problem(s);
  Summary summary = parse_contacts(problem.phylogeny, s.contacts);
  Network net = build_network(problem.phylogeny, summary);
  std::optional<Labeling> labeling;
  int code = 0;
  if (s.label) {
    labeling = check_admissible(net, LabelingOptions{!s.no_prune});
    if (!labeling) {
      err << "warning: contacts are not admissible; exporting without labels\n";
      code = 1;
    }
  }
  std::string dot = export_dot(net, labeling ? &*labeling : nullptr);
  if (s.dot_path.empty()) out << dot;
  else write_text_file(s.dot_path, dot);
  return code;
}

}  // namespace detail

/// Command-line entry point. Exit codes: 0 solution found / check passed,
/// 1 no solution / rejected, 2 input or usage error.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  detail::CliSettings s;
  CLI::App app{"Finds lateral contacts that turn a phylogeny into a perfect temporal network"};
  app.require_subcommand(1);

  auto inputs = [&](CLI::App* sub) {
    sub->add_option("files", s.files, "problem files, merged in order")->required()->check(
        CLI::ExistingFile);
    sub->add_option("--max-contacts", s.max_contacts, "bound on the number of contacts");
    sub->add_flag("--drop-uninformative", s.drop_uninformative,
                  "drop characters with fewer than two essential states");
    sub->add_option("--format", s.format, "report format")
        ->check(CLI::IsMember({"json", "text"}));
  };
  auto checks = [&](CLI::App* sub) {
    sub->add_flag("--no-prune", s.no_prune, "disable the labeling-search prune");
    sub->add_flag("--no-overlap-prefilter", s.no_overlap_prefilter,
                  "keep pairs whose contact intervals are disjoint");
    sub->add_flag("--temporal-first", s.temporal_first, "check timing before admissibility");
    sub->add_flag("--oracle", s.oracle, "decide through the exhaustive oracles");
  };

  auto* solve_cmd = app.add_subcommand("solve", "search for contact sets");
  inputs(solve_cmd);
  checks(solve_cmd);
  solve_cmd->add_option("--mode", s.mode, "minimum | all | subset-minimal")
      ->check(CLI::IsMember({"minimum", "all", "subset-minimal"}));
  solve_cmd->add_option("--cardinality", s.cardinality,
                        "stratum for subset-minimal mode (default: max-contacts)");
  solve_cmd->add_option("--minimal-relative-to", s.minimality,
                        "subsets that disqualify a candidate: passing | admissible")
      ->check(CLI::IsMember({"passing", "admissible"}));
  solve_cmd->add_option("--workers", s.workers, "parallel candidate checks")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--dot", s.dot_path, "write the first solution's network as DOT");
  solve_cmd->add_flag("--timing", s.timing, "include elapsed time in the report");

  auto* check_cmd = app.add_subcommand("check", "check one contact set");
  inputs(check_cmd);
  checks(check_cmd);
  check_cmd->add_option("--contacts", s.contacts, "contacts as child1:child2")
      ->delimiter(',');
  check_cmd->add_option("--dot", s.dot_path, "write the network as DOT when accepted");

  auto* filter_cmd = app.add_subcommand("filter", "timing feasibility of one contact set");
  inputs(filter_cmd);
  filter_cmd->add_option("--contacts", s.contacts, "contacts as child1:child2")
      ->delimiter(',');
  filter_cmd->add_flag("--oracle", s.oracle, "cross-check with the cycle-enumeration oracle");

  auto* essential_cmd = app.add_subcommand("essential", "print essential states per character");
  inputs(essential_cmd);

  auto* dot_cmd = app.add_subcommand("export-dot", "write a network as DOT");
  inputs(dot_cmd);
  dot_cmd->add_option("--contacts", s.contacts, "contacts as child1:child2")->delimiter(',');
  dot_cmd->add_flag("--label", s.label, "annotate vertices with an admissible labeling");
  dot_cmd->add_flag("--no-prune", s.no_prune, "disable the labeling-search prune");
  dot_cmd->add_option("--dot", s.dot_path, "output path (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve_cmd->parsed()) return detail::run_solve(s, out);
    if (check_cmd->parsed()) return detail::run_check(s, out);
    if (filter_cmd->parsed()) return detail::run_filter(s, out);
    if (essential_cmd->parsed()) return detail::run_essential(s, out);
    if (dot_cmd->parsed()) return detail::run_export_dot(s, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace tempnet
