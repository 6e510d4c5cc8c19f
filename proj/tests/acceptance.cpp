// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Time limits are part of each criterion.
#include <chrono>
#include <functional>
#include <iostream>

#include "support.hpp"
#include "tempnet/cli.hpp"

namespace {

using namespace tempnet;
using testing::Rng;
using testing::vx;
using Clock = std::chrono::steady_clock;

struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

struct CliRun {
  int code;
  std::string out;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tempnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str()};
}

// Every CLI invocation made by the criteria, replayed for criterion 10.
std::vector<std::vector<std::string>> invocations;

CliRun recorded(std::vector<std::string> args) {
  invocations.push_back(args);
  return cli(std::move(args));
}

Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(std::stoll(s));
  return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

const std::string toy4_path = testing::data_path("toy4.tnp");

std::string toy4_reproduction() {
  auto r = recorded({"solve", toy4_path, "--max-contacts", "2", "--mode", "minimum", "--format",
                     "json"});
  require(r.code == 0, "exit code " + std::to_string(r.code));
  auto j = nlohmann::json::parse(r.out);
  require(j["minimum_cardinality"] == 1, "minimum_cardinality " + j["minimum_cardinality"].dump());
  const nlohmann::json* bd = nullptr;
  for (const auto& s : j["solutions"])
    if (s["contacts"] == nlohmann::json::array({nlohmann::json::array({"B", "D"})})) bd = &s;
  require(bd, "no {pre-B, pre-D} solution");
  auto tb = parse_rational((*bd)["witness"]["pre-B"]);
  auto td = parse_rational((*bd)["witness"]["pre-D"]);
  require(tb == td, "pre-B and pre-D differ");
  require(Rational(800) < tb && tb < Rational(2000), "contact time outside (800, 2000)");
  const auto& g = (*bd)["labeling"]["x"];
  for (auto v : {"C", "E", "F", "R"}) require(g[v] == g["A"], std::string(v) + " not with A");
  for (auto v : {"pre-B", "D", "pre-D"}) require(g[v] == g["B"], std::string(v) + " not with B");
  require(g["A"] != g["B"], "one class only");
  return "pre-B = pre-D = " + format_decimal(tb);
}

std::string empty_increment() {
  auto r = recorded({"solve", toy4_path, "--max-contacts", "0", "--format", "json"});
  require(r.code == 1, "exit code " + std::to_string(r.code));
  auto j = nlohmann::json::parse(r.out);
  require(j["solutions"].empty(), "solutions reported");
  require(j["minimum_cardinality"].is_null(), "minimum_cardinality set");
  return "exit 1, no solutions";
}

std::string double_oracle_sweep() {
  auto p = testing::toy4();
  const auto& phy = p.phylogeny;
  std::set<Summary> oracle;
  auto bases = testing::non_root(phy);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < bases.size(); ++i)
    for (std::size_t j = i + 1; j < bases.size(); ++j) {
      ++pairs;
      Summary s({Contact(bases[i], bases[j])});
      if (oracle_admissible(phy, s) && oracle_feasible(build_constraints(p, s), 12))
        oracle.insert(s);
    }
  require(pairs == 15, "pair count " + std::to_string(pairs));

  auto r = recorded({"solve", toy4_path, "--mode", "minimum", "--format", "json"});
  auto j = nlohmann::json::parse(r.out);
  std::set<Summary> solved;
  for (const auto& s : j["solutions"]) {
    require(s["contacts"].size() == 1, "solution of size " + std::to_string(s["contacts"].size()));
    solved.insert(Summary({testing::contact(phy, s["contacts"][0][0].get<std::string>(),
                                            s["contacts"][0][1].get<std::string>())}));
  }
  require(solved == oracle, "solver and oracle sets differ");
  require(oracle.contains(testing::summary(phy, {{"B", "D"}})), "{pre-B, pre-D} missing");
  require(oracle.contains(testing::summary(phy, {{"A", "C"}})), "{pre-A, pre-C} missing");
  return std::to_string(oracle.size()) + " of 15 pairs pass both oracles";
}

std::string interval_exclusion() {
  auto p = testing::toy4();
  const auto& phy = p.phylogeny;
  auto E = vx(phy, "E");
  require(contact_interval(p, E) == testing::interval(-1100, 500), "E side interval");
  for (auto name : {"C", "D"}) {
    auto v = vx(phy, name);
    require(contact_interval(p, v) == testing::interval(600, 2100),
            std::string(name) + " side interval");
    require(!intervals_overlap(contact_interval(p, E), contact_interval(p, v)),
            std::string("E/") + name + " overlap");
    Contact crossing(E, v);
    for (std::size_t k = 1; k <= 2; ++k) {
      auto stream = enumerate_candidates(p, k, true);
      while (auto s = stream.next())
        require(std::find(s->contacts().begin(), s->contacts().end(), crossing) ==
                    s->contacts().end(),
                std::string("stream emits E/") + name);
    }
    Summary forced({crossing});
    require(!is_feasible(check_feasible(build_constraints(p, forced))),
            std::string("E/") + name + " feasible");
    auto r = recorded({"check", toy4_path, "--contacts", std::string("E:") + name,
                       "--no-overlap-prefilter", "--temporal-first"});
    require(r.out.find("TemporallyInfeasible") != std::string::npos,
            "check without prefilter: " + r.out);
  }
  return "E/C and E/D pruned and infeasible";
}

std::string prefilter_soundness() {
  Rng rng(20261016);
  std::size_t problems = 0, pruned = 0;
  for (; problems < 250; ++problems) {
    auto phy = testing::random_phylogeny(rng, {2, 7, 1, 2});
    auto p = make_problem(phy, testing::random_intervals(rng, phy, false), {}, 1);
    auto bases = testing::non_root(p.phylogeny);
    for (auto u : bases)
      for (auto v : bases) {
        if (u >= v || intervals_overlap(contact_interval(p, u), contact_interval(p, v))) continue;
        ++pruned;
        Summary s({Contact(u, v)});
        require(!is_feasible(check_feasible(build_constraints(p, s))),
                "feasible pruned pair in\n" + serialize_problem(p));
      }
  }
  require(pruned >= 100, "prefilter fired only " + std::to_string(pruned) + " times");
  return std::to_string(problems) + " problems, " + std::to_string(pruned) + " pruned pairs";
}

std::string feasibility_oracle_equivalence() {
  Rng rng(8);
  std::size_t feasible = 0, infeasible = 0;
  for (int i = 0; i < 600; ++i) {
    auto sys = testing::random_system(rng, 8);
    bool oracle = oracle_feasible(sys);
    require(is_feasible(check_feasible(sys)) == oracle,
            "disagreement on system " + std::to_string(i));
    ++(oracle ? feasible : infeasible);
  }
  require(feasible >= 100 && infeasible >= 100, "unbalanced sample");
  return std::to_string(feasible) + " feasible, " + std::to_string(infeasible) + " infeasible";
}

// Draws until both verdicts have been seen 100 times; every draw is compared.
std::string admissibility_oracle_equivalence() {
  Rng rng(7);
  std::size_t admissible = 0, inadmissible = 0, draws = 0;
  while ((admissible < 100 || inadmissible < 100) && draws < 5000) {
    ++draws;
    auto phy = testing::random_phylogeny(rng, {4, 7, 3, 3, true});
    auto s = testing::random_summary(rng, phy, 2);
    bool oracle = oracle_admissible(phy, s).has_value();
    require(check_admissible(phy, s).has_value() == oracle,
            "disagreement on draw " + std::to_string(draws));
    require(check_admissible(phy, s, {false}).has_value() == oracle,
            "unpruned search disagrees on draw " + std::to_string(draws));
    ++(oracle ? admissible : inadmissible);
  }
  require(draws >= 200 && admissible >= 100 && inadmissible >= 100, "quota not reached");
  return std::to_string(draws) + " instances, " + std::to_string(inadmissible) + " inadmissible";
}

std::string pruning_completeness() {
  Rng rng(88);
  std::size_t needing_contacts = 0, unsolvable = 0;
  for (int i = 0; i < 60; ++i) {
    auto p = testing::random_problem(rng, {3, 7, 3, 2, true}, i % 3 != 0);
    for (Mode mode : {Mode::minimum, Mode::all}) {
      SolveOptions on;
      on.mode = mode;
      SolveOptions off = on;
      off.check.prune = false;
      off.check.overlap_prefilter = false;
      auto a = solve(p, on), b = solve(p, off);
      require(a.solutions == b.solutions && a.minimum_cardinality == b.minimum_cardinality,
              "difference on\n" + serialize_problem(p));
      if (mode == Mode::minimum) {
        if (!a.minimum_cardinality) ++unsolvable;
        else if (*a.minimum_cardinality > 0) ++needing_contacts;
      }
    }
  }
  require(needing_contacts >= 10, "only " + std::to_string(needing_contacts) +
                                      " problems need contacts");
  recorded({"solve", toy4_path, "--no-prune", "--no-overlap-prefilter", "--format", "json"});
  return "60 problems, " + std::to_string(needing_contacts) + " need contacts, " +
         std::to_string(unsolvable) + " unsolvable";
}

std::string interval_table_ingestion() {
  auto doc = parse_document(testing::read_data("ie_intervals.tnp"), "ie_intervals.tnp");
  require(doc.records.size() == 19, "rows: " + std::to_string(doc.records.size()));
  std::string star = "%phylogeny\nroot proto-Indo-European\n";
  for (const auto& rec : doc.records)
    if (rec.tokens[1] != "proto-Indo-European")
      star += "edge proto-Indo-European " + rec.tokens[1] + "\n";
  std::vector<ProblemDocument> docs{parse_document(star, "star"), doc};
  auto p = build_problem(docs);
  const auto& phy = p.phylogeny;
  require(p.intervals.at(vx(phy, "proto-Indo-European")) == testing::interval(-4500, -3800),
          "proto-Indo-European");
  require(p.intervals.at(vx(phy, "Vertex-28")) == testing::interval(-3900, -3300), "Vertex-28");
  for (const auto& rec : doc.records) {
    auto iv = p.intervals.at(vx(phy, rec.tokens[1]));
    require(iv.lower.to_string() == rec.tokens[2] && iv.upper.to_string() == rec.tokens[3],
            rec.tokens[1]);
  }
  require(!intervals_overlap(testing::interval(-2500, -2100), testing::interval(1800, 2100)),
          "proto-Anatolian/Albanian overlap");
  require(!intervals_overlap(p.intervals.at(vx(phy, "proto-Anatolian")),
                             p.intervals.at(vx(phy, "Albanian"))),
          "parsed proto-Anatolian/Albanian overlap");
  return "19 rows";
}

std::string determinism() {
  require(!invocations.empty(), "no recorded commands");
  auto extra = invocations;
  extra.push_back({"solve", toy4_path, "--mode", "all", "--format", "json"});
  extra.push_back({"solve", toy4_path, "--mode", "subset-minimal", "--cardinality", "2"});
  for (const auto& args : extra) {
    auto first = cli(args), second = cli(args);
    auto one = args, eight = args;
    if (args[0] == "solve") {
      one.insert(one.end(), {"--workers", "1"});
      eight.insert(eight.end(), {"--workers", "8"});
    }
    auto w1 = cli(one), w8 = cli(eight);
    std::string line;
    for (const auto& a : args) line += " " + a;
    require(first.out == second.out && first.code == second.code, "repeat differs:" + line);
    require(w1.out == w8.out && w1.out == first.out, "worker count changes output:" + line);
  }
  return std::to_string(extra.size()) + " commands";
}

struct Criterion {
  int id;
  const char* name;
  std::chrono::milliseconds limit;
  std::function<std::string()> body;
};

}  // namespace

int main() {
  using std::chrono::milliseconds;
  const std::vector<Criterion> criteria{
      {1, "toy4 minimum solution with {pre-B, pre-D}", milliseconds(1000), toy4_reproduction},
      {2, "toy4 with zero contacts has no solution", milliseconds(1000), empty_increment},
      {3, "size-1 solutions equal the double-oracle sweep", milliseconds(5000),
       double_oracle_sweep},
      {4, "E/F interval exclusion", milliseconds(1000), interval_exclusion},
      {5, "prefilter soundness over 250 problems", milliseconds(60000), prefilter_soundness},
      {6, "feasibility oracle equivalence over 600 systems", milliseconds(60000),
       feasibility_oracle_equivalence},
      {7, "admissibility oracle equivalence, 100 of each verdict", milliseconds(120000),
       admissibility_oracle_equivalence},
      {8, "pruning completeness over 60 problems", milliseconds(120000), pruning_completeness},
      {9, "Indo-European interval table ingestion", milliseconds(1000), interval_table_ingestion},
      {10, "byte-identical reports across repeats and worker counts", milliseconds(60000),
       determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    auto start = Clock::now();
    std::string problem, detail;
    try {
      detail = c.body();
    } catch (const Failure& f) {
      problem = f.what;
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    auto took = std::chrono::duration_cast<milliseconds>(Clock::now() - start);
    if (problem.empty() && took > c.limit)
      problem = "took " + std::to_string(took.count()) + " ms, limit " +
                std::to_string(c.limit.count()) + " ms";
    std::cout << (problem.empty() ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.name
              << " (" << took.count() << " ms";
    if (problem.empty() && !detail.empty()) std::cout << "; " << detail;
    std::cout << ")";
    if (!problem.empty()) {
      std::cout << "\n      " << problem;
      ++failed;
    }
    std::cout << "\n";
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
