#pragma once

// Value of a remediation (paired rollouts against the silver rewrite), value
// impact of an exemplar set over a probe of remediation points, and the
// individual exemplar ranking.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negotia/arena.hpp"
#include "negotia/outcome.hpp"
#include "negotia/remediate.hpp"
#include "negotia/simulation.hpp"

namespace negotia {

struct RemediationPoint {
  RolloutPrefix prefix;
  std::string silver_remediation;
  std::optional<double> silver_reward;  // filled once, then shared
  std::uint64_t seed = 0;               // rollout seed that produced the prefix

  std::uint64_t continuation_seed() const;
};

struct ValueEstimate {
  double mean = 0;
  std::size_t n_points = 0;
  std::vector<double> per_point;
  std::string probe_id;
};

struct RolloutSettings {
  SimulationConfig sim;
  RewardWeights weights;
};

struct ProbeConfig {
  std::size_t n_points = 8;
  std::uint64_t seed = 0;
  /// Extra rollouts allowed for attempts that end without a violation.
  std::size_t retry_budget = 64;
};

/// Remediation points from fresh rollouts; silver rewrites come from
/// `silver_policy` with its exemplars ignored. Throws when the retry budget
/// runs out before `n_points` points are found.
std::vector<RemediationPoint> build_probe_set(const Arena& prototype, const RemediationPolicy& silver_policy,
                                              const RolloutSettings& settings, const ProbeConfig& config);

/// Identifier of a probe set; estimates are only comparable when equal.
std::string probe_identifier(std::span<const RemediationPoint> probe);

/// Reward of the continuation after `remediation`. Throws Error if the
/// rollout fails.
double rollout_reward(const RemediationPoint& point, std::string_view remediation, const RolloutSettings& settings);

/// Fills point.silver_reward if it is not set yet.
void prime_silver_reward(RemediationPoint& point, const RolloutSettings& settings);

/// R(continuation with y') - R(continuation with the silver rewrite), both
/// rolled out from the same continuation seed.
double value_of_remediation(RemediationPoint& point, std::string_view y_prime, const RolloutSettings& settings);

/// Evaluates exemplar sets against a fixed probe.
class ImpactEstimator {
 public:
  ImpactEstimator(const ExemplarPool& pool, RemediationPolicy base_policy, std::vector<RemediationPoint> probe,
                  RolloutSettings settings, std::size_t workers = 1);

  /// Invalid points (failed rollouts) are left out of the mean. Throws
  /// Error when every point fails.
  ValueEstimate estimate(const ExemplarSet& set) const;
  double impact(const ExemplarSet& set) const { return estimate(set).mean; }

  const std::vector<RemediationPoint>& probe() const noexcept { return probe_; }
  const std::string& probe_id() const noexcept { return probe_id_; }
  const ExemplarPool& pool() const noexcept { return *pool_; }

 private:
  const ExemplarPool* pool_;
  RemediationPolicy base_;
  std::vector<RemediationPoint> probe_;
  RolloutSettings settings_;
  std::size_t workers_;
  std::string probe_id_;
};

ValueEstimate estimate_value_impact(const ExemplarSet& set, const ImpactEstimator& estimator);

struct RankedExemplar {
  std::string id;
  double value_impact = 0;

  bool operator==(const RankedExemplar&) const = default;
};

/// Samples `sample_size` pool members without replacement (seeded), scores
/// each as a singleton set, and sorts by value descending, id ascending.
std::vector<RankedExemplar> rank_individuals(const ImpactEstimator& estimator, std::size_t sample_size,
                                             std::uint64_t sample_seed);

/// Stable order used by the ranking: value descending, id ascending.
void sort_ranked(std::vector<RankedExemplar>& ranked);

}  // namespace negotia
