#include "negotia/valueimpact.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>

#include "negotia/errors.hpp"
#include "negotia/parallel.hpp"

namespace negotia {

std::uint64_t RemediationPoint::continuation_seed() const { return derive_seed(seed, 0x5151); }

std::vector<RemediationPoint> build_probe_set(const Arena& prototype, const RemediationPolicy& silver_policy,
                                              const RolloutSettings& settings, const ProbeConfig& config) {
  if (config.n_points == 0) throw PreconditionError("build_probe_set: n_points must be >= 1");
  if (!(settings.sim.p_c > 0.0)) throw PreconditionError("build_probe_set: p_c must be > 0");
  const RemediationPolicy silver = silver_policy.with_exemplars({});

  std::vector<RemediationPoint> probe;
  const std::size_t attempts = config.n_points + config.retry_budget;
  for (std::size_t a = 0; a < attempts && probe.size() < config.n_points; ++a) {
    SimulationConfig sim = settings.sim;
    sim.seed = derive_seed(config.seed, a);
    auto arena = prototype.clone();
    std::optional<RolloutPrefix> prefix;
    try {
      prefix = rollout_to_first_violation(*arena, sim);
    } catch (const Error& e) {
      spdlog::warn("probe rollout {} failed: {}", a, e.what());
      continue;
    }
    if (!prefix) continue;
    RemediationPoint point;
    point.silver_remediation = remediate(silver, prefix->history, prefix->violation.text);
    point.prefix = std::move(*prefix);
    point.seed = sim.seed;
    probe.push_back(std::move(point));
  }
  if (probe.size() < config.n_points) {
    throw Error("build_probe_set: found " + std::to_string(probe.size()) + " of " +
                std::to_string(config.n_points) + " remediation points within " + std::to_string(attempts) +
                " rollouts");
  }
  return probe;
}

std::string probe_identifier(std::span<const RemediationPoint> probe) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& p : probe) {
    mix(std::to_string(p.seed));
    mix(p.prefix.violation.text);
    mix(p.silver_remediation);
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "probe-%zu-%016llx", probe.size(), static_cast<unsigned long long>(h));
  return buf;
}

double rollout_reward(const RemediationPoint& point, std::string_view remediation, const RolloutSettings& settings) {
  auto d = continue_rollout(point.prefix, remediation, settings.sim, point.continuation_seed());
  if (d.error) throw Error("continuation rollout failed: " + *d.error);
  return dialogue_reward(d, settings.weights);
}

void prime_silver_reward(RemediationPoint& point, const RolloutSettings& settings) {
  if (!point.silver_reward) point.silver_reward = rollout_reward(point, point.silver_remediation, settings);
}

double value_of_remediation(RemediationPoint& point, std::string_view y_prime, const RolloutSettings& settings) {
  prime_silver_reward(point, settings);
  return rollout_reward(point, y_prime, settings) - *point.silver_reward;
}

// ---------------------------------------------------------------------------

ImpactEstimator::ImpactEstimator(const ExemplarPool& pool, RemediationPolicy base_policy,
                                 std::vector<RemediationPoint> probe, RolloutSettings settings, std::size_t workers)
    : pool_(&pool),
      base_(std::move(base_policy)),
      probe_(std::move(probe)),
      settings_(std::move(settings)),
      workers_(std::max<std::size_t>(1, workers)) {
  if (probe_.empty()) throw PreconditionError("value impact needs a non-empty probe set");
  // The silver term does not depend on the candidate set: compute it once.
  for (auto& p : probe_) {
    try {
      prime_silver_reward(p, settings_);
    } catch (const Error& e) {
      spdlog::warn("probe point {} has no silver baseline: {}", p.seed, e.what());
    }
  }
  probe_id_ = probe_identifier(probe_);
}

ValueEstimate ImpactEstimator::estimate(const ExemplarSet& set) const {
  const RemediationPolicy policy = base_.with_exemplars(pool_->resolve(set));
  std::vector<std::optional<double>> values(probe_.size());
  parallel_for(probe_.size(), workers_, [&](std::size_t i) {
    const auto& p = probe_[i];
    if (!p.silver_reward) return;
    try {
      const auto y = remediate(policy, p.prefix.history, p.prefix.violation.text);
      values[i] = rollout_reward(p, y, settings_) - *p.silver_reward;
    } catch (const Error& e) {
      spdlog::warn("probe point {} invalid for this set: {}", p.seed, e.what());
    }
  });

  ValueEstimate est;
  est.probe_id = probe_id_;
  double sum = 0;
  for (const auto& v : values) {
    if (!v) continue;
    est.per_point.push_back(*v);
    sum += *v;
  }
  est.n_points = est.per_point.size();
  if (est.n_points == 0) throw Error("value impact: every probe point failed");
  est.mean = sum / static_cast<double>(est.n_points);
  return est;
}

ValueEstimate estimate_value_impact(const ExemplarSet& set, const ImpactEstimator& estimator) {
  return estimator.estimate(set);
}

void sort_ranked(std::vector<RankedExemplar>& ranked) {
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedExemplar& a, const RankedExemplar& b) {
    if (a.value_impact != b.value_impact) return a.value_impact > b.value_impact;
    return a.id < b.id;
  });
}

std::vector<RankedExemplar> rank_individuals(const ImpactEstimator& estimator, std::size_t sample_size,
                                             std::uint64_t sample_seed) {
  const auto& items = estimator.pool().items();
  if (items.empty()) throw PreconditionError("rank_individuals: empty pool");
  if (sample_size > items.size()) {
    throw PreconditionError("rank_individuals: sample size " + std::to_string(sample_size) + " exceeds pool size " +
                            std::to_string(items.size()));
  }
  std::vector<std::string> ids;
  ids.reserve(items.size());
  for (const auto& e : items) ids.push_back(e.id);
  Rng rng(sample_seed);
  partial_shuffle(std::span<std::string>(ids), sample_size, rng);
  ids.resize(sample_size);

  std::vector<RankedExemplar> ranked;
  ranked.reserve(ids.size());
  for (auto& id : ids) {
    const double v = estimator.impact(ExemplarSet{{id}, std::nullopt});
    ranked.push_back({std::move(id), v});
  }
  sort_ranked(ranked);
  return ranked;
}

}  // namespace negotia
