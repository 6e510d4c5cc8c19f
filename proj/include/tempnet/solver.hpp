#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "tempnet/model.hpp"
#include "tempnet/network.hpp"
#include "tempnet/temporal.hpp"

namespace tempnet {

enum class Mode { minimum, all, subset_minimal };

/// What a subset-minimal candidate is compared against.
enum class MinimalityBasis {
  passing,     // admissible and temporally feasible subsets
  admissible,  // admissible subsets, timing checked afterwards
};

struct CheckOptions {
  bool prune = true;              // backtracking prune in the labeling search
  bool overlap_prefilter = true;  // drop pairs whose contact intervals are disjoint
  bool temporal_first = false;    // run the timing check before admissibility
  bool use_oracles = false;       // decide through the exhaustive oracles
  std::size_t admissibility_oracle_limit = default_admissibility_oracle_limit;
  std::size_t feasibility_oracle_limit = default_feasibility_oracle_limit;
};

struct SolveOptions {
  Mode mode = Mode::minimum;
  std::optional<std::size_t> cardinality;  // subset-minimal only; defaults to max_contacts
  MinimalityBasis minimality = MinimalityBasis::passing;
  std::size_t workers = 1;
  CheckOptions check;
};

struct Solution {
  Summary summary;
  Labeling labeling;
  Witness witness;

  bool operator==(const Solution&) const = default;
};

enum class RejectionKind { Forbidden, OverlapPruned, NotAdmissible, TemporallyInfeasible };

inline std::string_view to_string(RejectionKind k) {
  switch (k) {
    case RejectionKind::Forbidden: return "Forbidden";
    case RejectionKind::OverlapPruned: return "OverlapPruned";
    case RejectionKind::NotAdmissible: return "NotAdmissible";
    case RejectionKind::TemporallyInfeasible: return "TemporallyInfeasible";
  }
  return "Unknown";
}

struct Rejection {
  RejectionKind kind;
  std::optional<Contact> contact;                      // Forbidden / OverlapPruned
  std::optional<InfeasibilityCertificate> certificate;  // TemporallyInfeasible
  std::optional<bool> admissible;                      // when it was established

  bool operator==(const Rejection&) const = default;
};

using CheckResult = std::variant<Solution, Rejection>;

struct SearchCounts {
  std::uint64_t candidates_examined = 0;
  std::uint64_t not_admissible = 0;
  std::uint64_t temporally_infeasible = 0;
  std::uint64_t admissible_rejected_by_temporal = 0;
  std::uint64_t non_minimal = 0;
  std::uint64_t pruned_forbidden = 0;
  std::uint64_t pruned_overlap = 0;

  bool operator==(const SearchCounts&) const = default;
};

struct SolveReport {
  Mode mode = Mode::minimum;
  std::size_t max_contacts = 0;
  std::optional<std::size_t> cardinality;  // subset-minimal stratum
  MinimalityBasis minimality = MinimalityBasis::passing;
  std::optional<std::size_t> minimum_cardinality;
  std::vector<Solution> solutions;
  SearchCounts counts;
  std::chrono::nanoseconds elapsed{0};
};

// ---------------------------------------------------------------------------
// Candidate enumeration

namespace detail {

inline std::uint64_t saturating_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > cap) return cap;
  }
  return static_cast<std::uint64_t>(r);
}

}  // namespace detail

/// Streams every summary of exactly `cardinality` contacts in canonical
/// order, skipping forbidden pairs and (optionally) pairs whose contact
/// intervals do not overlap.
class CandidateStream {
 public:
  CandidateStream(const Problem& problem, std::size_t cardinality, bool overlap_prefilter)
      : cardinality_(cardinality) {
    const auto& phy = problem.phylogeny;
    std::size_t all = 0, forbidden = 0;
    for (VertexIndex a = 0; a < phy.vertex_count(); ++a)
      for (VertexIndex b = a + 1; b < phy.vertex_count(); ++b) {
        if (a == phy.root() || b == phy.root()) continue;
        ++all;
        if (problem.is_forbidden(a, b)) {
          ++forbidden;
          continue;
        }
        if (overlap_prefilter &&
            !intervals_overlap(contact_interval(problem, a), contact_interval(problem, b)))
          continue;
        pairs_.emplace_back(a, b);
      }
    const auto total = detail::saturating_binomial(all, cardinality);
    const auto after_forbid = detail::saturating_binomial(all - forbidden, cardinality);
    const auto kept = detail::saturating_binomial(pairs_.size(), cardinality);
    pruned_forbidden_ = total - after_forbid;
    pruned_overlap_ = after_forbid - kept;
    if (cardinality_ <= pairs_.size()) {
      index_.resize(cardinality_);
      for (std::size_t i = 0; i < cardinality_; ++i) index_[i] = i;
    } else {
      done_ = true;
    }
  }

  std::optional<Summary> next() {
    if (done_) return std::nullopt;
    std::vector<Contact> contacts;
    for (std::size_t i : index_) contacts.push_back(pairs_[i]);
    advance();
    return Summary(std::move(contacts));
  }

  const std::vector<Contact>& allowed_pairs() const { return pairs_; }
  std::uint64_t pruned_forbidden() const { return pruned_forbidden_; }
  std::uint64_t pruned_overlap() const { return pruned_overlap_; }

 private:
  void advance() {
    const std::size_t n = pairs_.size(), k = cardinality_;
    std::size_t i = k;
    while (i > 0 && index_[i - 1] == n - k + i - 1) --i;
    if (i == 0) {
      done_ = true;
      return;
    }
    ++index_[i - 1];
    for (std::size_t j = i; j < k; ++j) index_[j] = index_[j - 1] + 1;
  }

  std::size_t cardinality_;
  std::vector<Contact> pairs_;
  std::vector<std::size_t> index_;
  bool done_ = false;
  std::uint64_t pruned_forbidden_ = 0;
  std::uint64_t pruned_overlap_ = 0;
};

inline CandidateStream enumerate_candidates(const Problem& problem, std::size_t cardinality,
                                            bool overlap_prefilter = true) {
  return CandidateStream(problem, cardinality, overlap_prefilter);
}

// ---------------------------------------------------------------------------
// Single-summary pipeline

namespace detail {

inline std::optional<Labeling> admissibility(const Problem& problem, const Summary& summary,
                                             const CheckOptions& opt) {
  if (opt.use_oracles)
    return oracle_admissible(problem.phylogeny, summary, opt.admissibility_oracle_limit);
  return check_admissible(problem.phylogeny, summary, LabelingOptions{opt.prune});
}

inline FeasibilityResult timing(const Problem& problem, const Summary& summary,
                                const CheckOptions& opt) {
  auto sys = build_constraints(problem, summary);
  auto result = check_feasible(sys);
  if (opt.use_oracles && oracle_feasible(sys, opt.feasibility_oracle_limit) != is_feasible(result))
    throw std::logic_error("feasibility oracle disagrees with the shortest-path check");
  return result;
}

}  // namespace detail

/// Runs one summary through forbid / overlap / admissibility / timing.
inline CheckResult check_summary(const Problem& problem, const Summary& summary,
                                 const CheckOptions& opt = {}) {
  // validates vertex references (UnknownVertex, RootUpVertex)
  (void)build_network(problem.phylogeny, summary);

  for (const auto& c : summary.contacts())
    if (problem.is_forbidden(c.first.base, c.second.base))
      return Rejection{RejectionKind::Forbidden, c, std::nullopt, std::nullopt};
  if (opt.overlap_prefilter)
    for (const auto& c : summary.contacts())
      if (!intervals_overlap(contact_interval(problem, c.first.base),
                             contact_interval(problem, c.second.base)))
        return Rejection{RejectionKind::OverlapPruned, c, std::nullopt, std::nullopt};

  std::optional<Labeling> labeling;
  if (!opt.temporal_first) {
    labeling = detail::admissibility(problem, summary, opt);
    if (!labeling) return Rejection{RejectionKind::NotAdmissible, std::nullopt, std::nullopt, false};
  }
  auto timed = detail::timing(problem, summary, opt);
  if (auto* cert = std::get_if<InfeasibilityCertificate>(&timed)) {
    std::optional<bool> adm;
    if (labeling) adm = true;
    return Rejection{RejectionKind::TemporallyInfeasible, std::nullopt, *cert, adm};
  }
  if (opt.temporal_first) {
    labeling = detail::admissibility(problem, summary, opt);
    if (!labeling) return Rejection{RejectionKind::NotAdmissible, std::nullopt, std::nullopt, false};
  }
  return Solution{summary, std::move(*labeling), std::get<Witness>(std::move(timed))};
}

// ---------------------------------------------------------------------------
// Search

namespace detail {

struct Outcome {
  std::optional<Solution> solution;
  std::optional<RejectionKind> rejection;
  bool admissible_known_true = false;
  bool non_minimal = false;
};

class Searcher {
 public:
  Searcher(const Problem& problem, const SolveOptions& options)
      : problem_(problem), options_(options) {}

  /// Checks one stratum; appends its solutions in canonical order.
  void run_stratum(std::size_t cardinality, bool minimal_only, SolveReport& report) {
    auto stream = enumerate_candidates(problem_, cardinality, options_.check.overlap_prefilter);
    report.counts.pruned_forbidden += stream.pruned_forbidden();
    report.counts.pruned_overlap += stream.pruned_overlap();

    const std::size_t workers = std::max<std::size_t>(1, options_.workers);
    const std::size_t chunk_size = 64 * workers;
    std::vector<Summary> chunk;
    for (;;) {
      chunk.clear();
      while (chunk.size() < chunk_size) {
        auto s = stream.next();
        if (!s) break;
        chunk.push_back(std::move(*s));
      }
      if (chunk.empty()) break;
      auto outcomes = evaluate(chunk, minimal_only, workers);
      for (auto& o : outcomes) fold(std::move(o), report);
    }
  }

 private:
  std::vector<Outcome> evaluate(const std::vector<Summary>& chunk, bool minimal_only,
                                std::size_t workers) {
    std::vector<Outcome> out(chunk.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < chunk.size();) {
        try {
          out[i] = minimal_only ? evaluate_minimal(chunk[i]) : evaluate_plain(chunk[i]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    if (workers == 1 || chunk.size() == 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < std::min(workers, chunk.size()); ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
  }

  Outcome evaluate_plain(const Summary& s) {
    Outcome o;
    auto r = check_summary(problem_, s, options_.check);
    if (auto* sol = std::get_if<Solution>(&r)) {
      o.solution = std::move(*sol);
    } else {
      const auto& rej = std::get<Rejection>(r);
      o.rejection = rej.kind;
      o.admissible_known_true = rej.admissible.value_or(false);
    }
    return o;
  }

  Outcome evaluate_minimal(const Summary& s) {
    if (options_.minimality == MinimalityBasis::passing) {
      Outcome o = evaluate_plain(s);
      if (o.solution && has_subset(s, [&](const Summary& sub) { return passes(sub); })) {
        o.solution.reset();
        o.non_minimal = true;
      }
      return o;
    }
    Outcome o;
    if (!admissible(s)) {
      o.rejection = RejectionKind::NotAdmissible;
      return o;
    }
    if (has_subset(s, [&](const Summary& sub) { return admissible(sub); })) {
      o.non_minimal = true;
      return o;
    }
    return evaluate_plain(s);
  }

  template <class Pred>
  static bool has_subset(const Summary& s, Pred&& pred) {
    const auto& cs = s.contacts();
    const std::uint64_t full = (std::uint64_t{1} << cs.size()) - 1;
    for (std::uint64_t mask = 0; mask < full; ++mask) {
      std::vector<Contact> sub;
      for (std::size_t i = 0; i < cs.size(); ++i)
        if (mask & (std::uint64_t{1} << i)) sub.push_back(cs[i]);
      if (pred(Summary(std::move(sub)))) return true;
    }
    return false;
  }

  bool passes(const Summary& s) {
    return memo(pass_cache_, s, [&] {
      return std::holds_alternative<Solution>(check_summary(problem_, s, options_.check));
    });
  }

  bool admissible(const Summary& s) {
    return memo(admissible_cache_, s, [&] {
      return detail::admissibility(problem_, s, options_.check).has_value();
    });
  }

  template <class F>
  bool memo(std::map<Summary, bool>& cache, const Summary& s, F&& compute) {
    {
      std::lock_guard lock(cache_mutex_);
      if (auto it = cache.find(s); it != cache.end()) return it->second;
    }
    bool value = compute();
    std::lock_guard lock(cache_mutex_);
    cache.emplace(s, value);
    return value;
  }

  static void fold(Outcome o, SolveReport& report) {
    auto& c = report.counts;
    ++c.candidates_examined;
    if (o.non_minimal) ++c.non_minimal;
    if (o.solution) {
      report.solutions.push_back(std::move(*o.solution));
    } else if (o.rejection == RejectionKind::NotAdmissible) {
      ++c.not_admissible;
    } else if (o.rejection == RejectionKind::TemporallyInfeasible) {
      ++c.temporally_infeasible;
      if (o.admissible_known_true) ++c.admissible_rejected_by_temporal;
    }
  }

  const Problem& problem_;
  const SolveOptions& options_;
  std::mutex cache_mutex_;
  std::map<Summary, bool> pass_cache_;
  std::map<Summary, bool> admissible_cache_;
};

}  // namespace detail

/// Iterative deepening over the number of contacts.
///  minimum        - stop at the first cardinality with a solution
///  all            - every solution with at most max_contacts contacts
///  subset_minimal - solutions of one cardinality with no solution
///                   (or admissible set) as a proper subset
inline SolveReport solve(const Problem& problem, const SolveOptions& options = {}) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  report.mode = options.mode;
  report.max_contacts = problem.max_contacts;
  report.minimality = options.minimality;
  detail::Searcher searcher(problem, options);

  switch (options.mode) {
    case Mode::minimum:
      for (std::size_t c = 0; c <= problem.max_contacts; ++c) {
        searcher.run_stratum(c, false, report);
        if (!report.solutions.empty()) {
          report.minimum_cardinality = c;
          break;
        }
      }
      break;
    case Mode::all:
      for (std::size_t c = 0; c <= problem.max_contacts; ++c) {
        searcher.run_stratum(c, false, report);
        if (!report.solutions.empty() && !report.minimum_cardinality)
          report.minimum_cardinality = c;
      }
      break;
    case Mode::subset_minimal: {
      const std::size_t c = options.cardinality.value_or(problem.max_contacts);
      if (c >= 64) throw std::invalid_argument("subset-minimal cardinality must be below 64");
      report.cardinality = c;
      searcher.run_stratum(c, true, report);
      if (!report.solutions.empty()) report.minimum_cardinality = c;
      break;
    }
  }
  report.elapsed = std::chrono::steady_clock::now() - start;
  return report;
}

}  // namespace tempnet
