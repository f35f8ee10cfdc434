#include "negotia/search.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <deque>

#include "negotia/errors.hpp"

namespace negotia {

CandidateSplit split_candidates(const std::vector<RankedExemplar>& ranked, std::size_t n) {
  if (ranked.size() <= n) {
    throw PreconditionError("split_candidates: need more than " + std::to_string(n) + " ranked exemplars, got " +
                            std::to_string(ranked.size()));
  }
  CandidateSplit s;
  for (std::size_t i = 0; i < ranked.size(); ++i) (i < n ? s.init : s.candidates).push_back(ranked[i].id);
  return s;
}

double delta(const ValueEstimate& child, const ValueEstimate& parent) {
  if (child.probe_id != parent.probe_id) {
    throw PreconditionError("delta: estimates come from different probe sets (" + child.probe_id + " vs " +
                            parent.probe_id + ")");
  }
  return child.mean - parent.mean;
}

std::pair<ExemplarSet, SearchTrace> search_optimal_set(const std::vector<std::string>& init,
                                                       const std::vector<std::string>& candidates, std::size_t m,
                                                       const ImpactFn& impact) {
  if (m < 1) throw PreconditionError("search: M must be >= 1");
  if (auto problems = validate_exemplar_set(ExemplarSet{init, std::nullopt}); !problems.empty()) {
    throw PreconditionError("search: S_INIT invalid: " + problems.front());
  }
  const std::size_t k = init.size();

  SearchTrace trace;
  trace.root.members = init;
  trace.root.impact = impact(ExemplarSet{init, std::nullopt});
  trace.root.enqueued = true;
  trace.best = ExemplarSet{init, trace.root.impact};

  struct Node {
    std::size_t id;
    std::vector<std::string> members;
    std::size_t position;
    double impact;
  };
  std::deque<Node> queue{{0, init, 0, trace.root.impact}};

  while (!queue.empty()) {
    Node node = std::move(queue.front());
    queue.pop_front();
    if (node.position >= k) continue;

    std::size_t failures = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const auto& e = candidates[c];
      if (std::find(node.members.begin(), node.members.end(), e) != node.members.end()) continue;

      std::vector<std::string> child = node.members;
      child[node.position] = e;
      std::optional<double> child_impact;
      try {
        child_impact = impact(ExemplarSet{child, std::nullopt});
      } catch (const Error& err) {
        spdlog::warn("search: impact of candidate {} at position {} failed: {}", e, node.position, err.what());
      }

      bool improved = false;
      if (child_impact) {
        SearchEvaluation ev;
        ev.node = trace.evaluations.size() + 1;
        ev.parent = node.id;
        ev.position = node.position;
        ev.members = child;
        ev.impact = *child_impact;
        ev.delta = delta(*child_impact, node.impact);
        improved = ev.delta > 0;
        ev.enqueued = improved;
        if (improved) {
          queue.push_back({ev.node, child, node.position + 1, ev.impact});
          if (ev.impact > *trace.best.value_impact) trace.best = ExemplarSet{child, ev.impact};
        }
        trace.evaluations.push_back(std::move(ev));
      }

      if (improved) {
        failures = 0;
        continue;
      }
      if (++failures == m) {
        const bool more = std::any_of(candidates.begin() + static_cast<std::ptrdiff_t>(c) + 1, candidates.end(),
                                      [&](const std::string& x) {
                                        return std::find(node.members.begin(), node.members.end(), x) ==
                                               node.members.end();
                                      });
        if (more) trace.pruning.push_back({node.id, node.position, failures});
        break;
      }
    }
  }
  return {trace.best, std::move(trace)};
}

namespace {

Json evaluation_json(const SearchEvaluation& e, bool root) {
  Json j;
  j["node"] = e.node;
  if (!root) j["parent"] = e.parent;
  j["position"] = e.position;
  j["members"] = e.members;
  j["impact"] = e.impact;
  if (!root) {
    j["delta"] = e.delta;
    j["enqueued"] = e.enqueued;
  }
  return j;
}

}  // namespace

Json to_json(const SearchTrace& trace) {
  Json j;
  j["root"] = evaluation_json(trace.root, true);
  j["evaluations"] = Json::array();
  for (const auto& e : trace.evaluations) j["evaluations"].push_back(evaluation_json(e, false));
  j["pruning"] = Json::array();
  for (const auto& p : trace.pruning) {
    j["pruning"].push_back(Json{{"node", p.node}, {"position", p.position}, {"failures", p.failures}});
  }
  j["best"] = to_json(trace.best);
  return j;
}

}  // namespace negotia
