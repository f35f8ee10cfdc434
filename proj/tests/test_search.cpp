#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "negotia/errors.hpp"
#include "negotia/search.hpp"

using namespace negotia;

namespace {

// Additive impact from a per-id score table.
ImpactFn additive(std::map<std::string, double> score, int* calls = nullptr) {
  return [score = std::move(score), calls](const ExemplarSet& s) {
    if (calls) ++*calls;
    double v = 0;
    for (const auto& id : s.members) v += score.at(id);
    return v;
  };
}

std::vector<RankedExemplar> ranked(std::initializer_list<const char*> ids) {
  std::vector<RankedExemplar> r;
  double v = 1;
  for (auto id : ids) r.push_back({id, v -= 0.1});
  return r;
}

}  // namespace

TEST(SplitCandidates, TopNAndRest) {
  const auto s = split_candidates(ranked({"a", "b", "c", "d"}), 2);
  EXPECT_EQ(s.init, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(s.candidates, (std::vector<std::string>{"c", "d"}));
  EXPECT_THROW(split_candidates(ranked({"a", "b"}), 2), PreconditionError);
  EXPECT_EQ(split_candidates(ranked({"a", "b", "c"}), 0).candidates.size(), 3u);
}

TEST(Delta, Examples) {
  EXPECT_NEAR(delta(0.30, 0.25), 0.05, 1e-12);
  ValueEstimate a{0.30, 1, {0.30}, "probe-1-aa"}, b{0.25, 1, {0.25}, "probe-1-aa"};
  EXPECT_NEAR(delta(a, b), 0.05, 1e-12);
  b.probe_id = "probe-1-bb";
  EXPECT_THROW(delta(a, b), PreconditionError);
}

TEST(Search, EmptyCandidatesReturnInit) {
  int calls = 0;
  const auto [best, trace] = search_optimal_set({"a", "b"}, {}, 2, additive({{"a", 1}, {"b", 2}}, &calls));
  EXPECT_EQ(best.members, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(best.value_impact, 3.0);
  EXPECT_EQ(calls, 1);
  EXPECT_TRUE(trace.evaluations.empty());
  EXPECT_TRUE(trace.pruning.empty());
}

TEST(Search, Preconditions) {
  EXPECT_THROW(search_optimal_set({"a"}, {"b"}, 0, additive({{"a", 1}, {"b", 1}})), PreconditionError);
  EXPECT_THROW(search_optimal_set({"a", "a"}, {"b"}, 1, additive({{"a", 1}, {"b", 1}})), PreconditionError);
  EXPECT_THROW(search_optimal_set({"a"}, {"b"}, 1, [](const ExemplarSet&) -> double { throw Error("x"); }), Error);
}

struct PruneCase {
  const char* name;
  std::map<std::string, double> score;
  std::size_t m;
  std::size_t evaluations;
  std::size_t pruning;
  std::vector<std::string> best;
};

void PrintTo(const PruneCase& c, std::ostream* os) { *os << c.name; }

class SearchTable : public ::testing::TestWithParam<PruneCase> {};

// K=1, S_INIT={i}, S_CAND={c1,c2,c3}.
TEST_P(SearchTable, Traversal) {
  const auto& c = GetParam();
  const auto [best, trace] = search_optimal_set({"i"}, {"c1", "c2", "c3"}, c.m, additive(c.score));
  EXPECT_EQ(trace.evaluations.size(), c.evaluations);
  EXPECT_EQ(trace.pruning.size(), c.pruning);
  EXPECT_EQ(best.members, c.best);
}

INSTANTIATE_TEST_SUITE_P(
    Cases, SearchTable,
    ::testing::Values(
        // First try fails, M=1 prunes with two candidates left.
        PruneCase{"first_fails", {{"i", 5}, {"c1", 1}, {"c2", 9}, {"c3", 9}}, 1, 1, 1, {"i"}},
        // Same table, M=2 lets c2 through; children stop at position 1 = K.
        PruneCase{"m2_recovers", {{"i", 5}, {"c1", 1}, {"c2", 9}, {"c3", 7}}, 2, 3, 0, {"c2"}},
        // Every candidate improves; the best of them wins.
        PruneCase{"all_improve", {{"i", 0}, {"c1", 1}, {"c2", 3}, {"c3", 2}}, 1, 3, 0, {"c2"}},
        // Failure on the last candidate has nothing left to prune.
        PruneCase{"last_fails", {{"i", 0}, {"c1", 1}, {"c2", 2}, {"c3", -1}}, 1, 3, 0, {"c2"}},
        // Ties are not improvements.
        PruneCase{"tie", {{"i", 1}, {"c1", 1}, {"c2", 5}, {"c3", 5}}, 1, 1, 1, {"i"}}),
    [](const auto& info) { return std::string(info.param.name); });

// Invariants on a larger random-ish instance.
TEST(Search, TraceInvariants) {
  std::map<std::string, double> score{{"a", 0.5}, {"b", 0.4}, {"c", 0.45}, {"d", 0.6},
                                      {"e", 0.1}, {"f", 0.55}, {"g", 0.3}};
  const std::vector<std::string> init{"a", "b", "c"}, cand{"d", "f", "e", "g"};
  const auto [best, trace] = search_optimal_set(init, cand, 2, additive(score));

  EXPECT_GE(*best.value_impact, trace.root.impact);
  EXPECT_GT(*best.value_impact, trace.root.impact);
  double max_seen = trace.root.impact;
  std::map<std::size_t, std::vector<std::string>> members{{0, init}};
  std::map<std::size_t, std::size_t> last_candidate;
  for (const auto& ev : trace.evaluations) {
    max_seen = std::max(max_seen, ev.impact);
    members[ev.node] = ev.members;
    ASSERT_TRUE(members.count(ev.parent));
    const auto& parent = members[ev.parent];
    std::size_t diff = 0;
    for (std::size_t i = 0; i < parent.size(); ++i) diff += parent[i] != ev.members[i];
    EXPECT_EQ(diff, 1u);
    EXPECT_NE(parent[ev.position], ev.members[ev.position]);
    EXPECT_EQ(std::set<std::string>(ev.members.begin(), ev.members.end()).size(), 3u);
    EXPECT_EQ(ev.enqueued, ev.delta > 0);
    // candidates for one node are tried in rank order
    const auto rank = static_cast<std::size_t>(std::find(cand.begin(), cand.end(), ev.members[ev.position]) - cand.begin());
    if (last_candidate.count(ev.parent)) EXPECT_GT(rank, last_candidate[ev.parent]);
    last_candidate[ev.parent] = rank;
  }
  EXPECT_EQ(*best.value_impact, max_seen);
}

TEST(Search, FailingImpactCountsAsFailure) {
  auto impact = [](const ExemplarSet& s) -> double {
    if (s.members[0] == "c1") throw Error("rollout failed");
    return s.members[0] == "i" ? 0.0 : 1.0;
  };
  const auto [best, trace] = search_optimal_set({"i"}, {"c1", "c2"}, 1, impact);
  EXPECT_TRUE(trace.evaluations.empty());
  ASSERT_EQ(trace.pruning.size(), 1u);
  EXPECT_EQ(trace.pruning[0].failures, 1u);
  EXPECT_EQ(best.members, std::vector<std::string>{"i"});
}

TEST(Search, TraceJson) {
  const auto [best, trace] = search_optimal_set({"i"}, {"c1", "c2"}, 1, additive({{"i", 0}, {"c1", 1}, {"c2", -1}}));
  const Json j = to_json(trace);
  EXPECT_EQ(j["root"]["members"], Json::array({"i"}));
  EXPECT_FALSE(j["root"].contains("delta"));
  ASSERT_EQ(j["evaluations"].size(), 2u);
  EXPECT_EQ(j["evaluations"][0]["node"], 1);
  EXPECT_EQ(j["evaluations"][0]["parent"], 0);
  EXPECT_EQ(j["evaluations"][0]["enqueued"], true);
  EXPECT_EQ(j["evaluations"][1]["enqueued"], false);
  EXPECT_TRUE(j["pruning"].empty());
  EXPECT_TRUE(j.contains("best"));
}
