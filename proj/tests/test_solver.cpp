#include <gtest/gtest.h>

#include "support.hpp"

namespace tempnet {
namespace {

using testing::contact;
using testing::summary;
using testing::vx;

std::set<Summary> summaries(const SolveReport& r) {
  std::set<Summary> out;
  for (const auto& s : r.solutions) out.insert(s.summary);
  return out;
}

std::vector<Summary> drain(CandidateStream stream) {
  std::vector<Summary> out;
  while (auto s = stream.next()) out.push_back(std::move(*s));
  return out;
}

TEST(CandidateStream, AllPairsWithWideIntervals) {
  auto p = testing::toy4();
  p.intervals = TimeIntervals(p.phylogeny.vertex_count());
  auto all = drain(enumerate_candidates(p, 1, true));
  ASSERT_EQ(all.size(), 15u);
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
  EXPECT_EQ(drain(enumerate_candidates(p, 0, true)), std::vector<Summary>{Summary()});
  EXPECT_EQ(drain(enumerate_candidates(p, 2, true)).size(), 105u);
}

TEST(CandidateStream, OverlapPrefilterDropsCrossingPairs) {
  auto p = testing::toy4();
  const auto& phy = p.phylogeny;
  auto stream = enumerate_candidates(p, 1, true);
  auto pruned = stream.pruned_overlap();
  auto kept = drain(std::move(stream));
  EXPECT_EQ(kept.size() + pruned, 15u);
  auto ce = summary(phy, {{"C", "E"}});
  EXPECT_EQ(std::count(kept.begin(), kept.end(), ce), 0);
  auto unfiltered = drain(enumerate_candidates(p, 1, false));
  EXPECT_EQ(unfiltered.size(), 15u);
  EXPECT_EQ(std::count(unfiltered.begin(), unfiltered.end(), ce), 1);
}

TEST(CandidateStream, ForbiddenPairNeverEmitted) {
  auto p = testing::toy4();
  const auto& phy = p.phylogeny;
  p.forbidden.insert(ordered_pair(vx(phy, "B"), vx(phy, "D")));
  auto bd = contact(phy, "B", "D");
  for (std::size_t k = 1; k <= 2; ++k) {
    auto stream = enumerate_candidates(p, k, true);
    EXPECT_GT(stream.pruned_forbidden(), 0u);
    for (const auto& s : drain(std::move(stream)))
      EXPECT_EQ(std::count(s.contacts().begin(), s.contacts().end(), bd), 0);
  }
}

TEST(CandidateStream, ForbiddenIndoEuropeanPair) {
  std::string tree =
      "%phylogeny\nroot proto-Indo-European\n"
      "edge proto-Indo-European proto-Celtic\n"
      "edge proto-Indo-European proto-Baltic\n"
      "edge proto-Indo-European proto-Germanic\n";
  std::vector<ProblemDocument> docs{
      parse_document(tree, "tree"),
      parse_document(testing::read_data("ie_constraints.tnp"), "ie_constraints.tnp")};
  auto p = build_problem(docs);
  auto banned = contact(p.phylogeny, "proto-Celtic", "proto-Baltic");
  auto all = drain(enumerate_candidates(p, 1, false));
  EXPECT_EQ(all.size(), 2u);
  for (const auto& s : all) EXPECT_NE(s.contacts()[0], banned);
}

TEST(CheckSummary, Toy4Verdicts) {
  auto p = testing::toy4();
  const auto& phy = p.phylogeny;
  auto bd = check_summary(p, summary(phy, {{"B", "D"}}));
  ASSERT_TRUE(std::holds_alternative<Solution>(bd));
  const auto& sol = std::get<Solution>(bd);
  auto net = build_network(phy, sol.summary);
  EXPECT_TRUE(verify_labeling(net, sol.labeling));
  EXPECT_TRUE(verify_witness(build_constraints(p, sol.summary), sol.witness));

  auto bc = check_summary(p, summary(phy, {{"B", "C"}}));
  ASSERT_TRUE(std::holds_alternative<Rejection>(bc));
  EXPECT_EQ(std::get<Rejection>(bc).kind, RejectionKind::NotAdmissible);
}

TEST(CheckSummary, CrossingPairRejectedEitherWay) {
  auto p = testing::toy4();
  auto ce = summary(p.phylogeny, {{"C", "E"}});
  auto pruned = std::get<Rejection>(check_summary(p, ce));
  EXPECT_EQ(pruned.kind, RejectionKind::OverlapPruned);
  ASSERT_TRUE(pruned.contact);

  CheckOptions off;
  off.overlap_prefilter = false;
  off.temporal_first = true;
  auto timed = std::get<Rejection>(check_summary(p, ce, off));
  EXPECT_EQ(timed.kind, RejectionKind::TemporallyInfeasible);
  ASSERT_TRUE(timed.certificate);
  EXPECT_TRUE(verify_certificate(build_constraints(p, ce), *timed.certificate));
}

TEST(CheckSummary, ForbiddenReported) {
  auto p = testing::toy4();
  const auto& phy = p.phylogeny;
  p.forbidden.insert(ordered_pair(vx(phy, "B"), vx(phy, "D")));
  auto r = std::get<Rejection>(check_summary(p, summary(phy, {{"B", "D"}})));
  EXPECT_EQ(r.kind, RejectionKind::Forbidden);
}

TEST(CheckSummary, OracleRouteAgrees) {
  auto p = testing::toy4();
  CheckOptions oracle;
  oracle.use_oracles = true;
  oracle.feasibility_oracle_limit = 12;
  auto bases = testing::non_root(p.phylogeny);
  for (std::size_t i = 0; i < bases.size(); ++i)
    for (std::size_t j = i + 1; j < bases.size(); ++j) {
      Summary s({Contact(bases[i], bases[j])});
      auto fast = check_summary(p, s);
      auto slow = check_summary(p, s, oracle);
      EXPECT_EQ(fast.index(), slow.index());
    }
}

TEST(Solve, Toy4Minimum) {
  auto p = testing::toy4();
  const auto& phy = p.phylogeny;
  auto r = solve(p);
  ASSERT_EQ(r.minimum_cardinality, 1u);
  EXPECT_EQ(summaries(r), (std::set<Summary>{summary(phy, {{"A", "C"}}),
                                             summary(phy, {{"B", "D"}})}));
  for (const auto& s : r.solutions) {
    auto b = *s.witness.at("pre-" + phy.name(s.summary.contacts()[0].first.base));
    EXPECT_GT(b, Rational(600));
    EXPECT_LT(b, Rational(2100));
  }
  // stratum 0 plus every surviving pair of stratum 1
  EXPECT_EQ(r.counts.candidates_examined + r.counts.pruned_overlap, 1u + 15u);
}

TEST(Solve, Toy4NoContactsAllowed) {
  auto p = testing::toy4();
  p.max_contacts = 0;
  auto r = solve(p);
  EXPECT_FALSE(r.minimum_cardinality);
  EXPECT_TRUE(r.solutions.empty());
  EXPECT_EQ(r.counts.not_admissible, 1u);
}

TEST(Solve, MinimumIsSliceOfAll) {
  auto p = testing::toy4();
  SolveOptions all;
  all.mode = Mode::all;
  auto every = solve(p, all);
  auto minimum = solve(p);
  ASSERT_EQ(every.minimum_cardinality, minimum.minimum_cardinality);
  std::set<Summary> slice;
  for (const auto& s : every.solutions)
    if (s.summary.size() == *every.minimum_cardinality) slice.insert(s.summary);
  EXPECT_EQ(slice, summaries(minimum));
  EXPECT_GT(every.solutions.size(), minimum.solutions.size());
}

TEST(Solve, SubsetMinimalExcludesSupersets) {
  auto p = testing::toy4();
  SolveOptions opt;
  opt.mode = Mode::subset_minimal;
  opt.cardinality = 2;
  auto r = solve(p, opt);
  // every passing pair of contacts contains {A,C} or {B,D}
  EXPECT_TRUE(r.solutions.empty());
  EXPECT_GT(r.counts.non_minimal, 0u);

  SolveOptions one = opt;
  one.cardinality = 1;
  EXPECT_EQ(solve(p, one).solutions.size(), 2u);
}

TEST(Solve, SubsetMinimalRelativeToAdmissible) {
  auto p = testing::toy4();
  SolveOptions opt;
  opt.mode = Mode::subset_minimal;
  opt.cardinality = 2;
  opt.minimality = MinimalityBasis::admissible;
  auto r = solve(p, opt);
  for (const auto& s : r.solutions)
    for (const auto& c : s.summary.contacts())
      EXPECT_FALSE(check_admissible(p.phylogeny, Summary({c})));
}

TEST(Solve, WorkerCountDoesNotChangeTheReport) {
  auto p = testing::toy4();
  SolveOptions opt;
  opt.mode = Mode::all;
  auto one = solve(p, opt);
  opt.workers = 8;
  auto eight = solve(p, opt);
  EXPECT_EQ(one.solutions, eight.solutions);
  EXPECT_EQ(one.counts, eight.counts);
}

TEST(Solve, EverySolutionReverifies) {
  testing::Rng rng(77);
  for (int i = 0; i < 25; ++i) {
    auto p = testing::random_problem(rng, {2, 6, 2, 3});
    SolveOptions opt;
    opt.mode = Mode::all;
    for (const auto& s : solve(p, opt).solutions) {
      EXPECT_TRUE(verify_labeling(build_network(p.phylogeny, s.summary), s.labeling));
      EXPECT_TRUE(verify_witness(build_constraints(p, s.summary), s.witness));
    }
  }
}

}  // namespace
}  // namespace tempnet
