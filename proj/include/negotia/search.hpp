#pragma once

// Early-pruning breadth-first traversal over exemplar sets. Starting from the
// top-n ranked exemplars, each node tries the remaining candidates (in rank
// order) at one position; improving replacements become child nodes at the
// next position, and M consecutive non-improving tries prune the node.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "negotia/core.hpp"
#include "negotia/json.hpp"
#include "negotia/valueimpact.hpp"

namespace negotia {

struct CandidateSplit {
  std::vector<std::string> init;        // S_INIT
  std::vector<std::string> candidates;  // S_CAND, rank order
};

/// Throws PreconditionError unless |ranked| > n.
CandidateSplit split_candidates(const std::vector<RankedExemplar>& ranked, std::size_t n);

/// child - parent. Throws PreconditionError for estimates on different probes.
double delta(const ValueEstimate& child, const ValueEstimate& parent);
inline double delta(double child, double parent) { return child - parent; }

struct SearchEvaluation {
  std::size_t node = 0;    // id of this evaluation; the root is node 0
  std::size_t parent = 0;  // node id of the set it was derived from
  std::size_t position = 0;
  std::vector<std::string> members;
  double impact = 0;
  double delta = 0;
  bool enqueued = false;
};

struct PruningEvent {
  std::size_t node = 0;
  std::size_t position = 0;
  std::size_t failures = 0;
};

struct SearchTrace {
  SearchEvaluation root;                     // S_INIT
  std::vector<SearchEvaluation> evaluations;  // children, in evaluation order
  std::vector<PruningEvent> pruning;
  ExemplarSet best;
};

using ImpactFn = std::function<double(const ExemplarSet&)>;

/// Returns the best set seen (S_INIT included) and the full trace. A failing
/// impact call counts as a non-improving step. Throws if S_INIT itself
/// cannot be evaluated.
std::pair<ExemplarSet, SearchTrace> search_optimal_set(const std::vector<std::string>& init,
                                                       const std::vector<std::string>& candidates, std::size_t m,
                                                       const ImpactFn& impact);

Json to_json(const SearchTrace& trace);

}  // namespace negotia
