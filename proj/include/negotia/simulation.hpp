#pragma once

// Negotiation rollouts: opening prefix, buyer/seller alternation, Bernoulli
// violation injection on seller turns, optional remediation, moderator stop.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negotia/arena.hpp"
#include "negotia/core.hpp"

namespace negotia {

/// Rewrites a violating seller utterance given the turns before it.
using Remediator = std::function<std::string(std::span<const Turn> history, std::string_view violation)>;

struct SimulationConfig {
  double p_c = 0.4;
  bool remediation_enabled = false;
  bool single_remediation_point = false;
  std::size_t max_turns = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One full rollout. Backend failures produce a partial dialogue with
/// `error` set. Hitting max_turns forces deal=false.
Dialogue simulate(Arena& arena, const Remediator* remediator, const SimulationConfig& config, std::string id);

/// Moderator check including the turn cap.
bool moderator_end(Arena& arena, std::span<const Turn> tau, std::size_t max_turns);

struct RolloutPrefix {
  std::vector<Turn> history;  // h_<s
  Turn violation;             // x_s, unremediated
  /// Agents frozen right after x_s was spoken.
  std::shared_ptr<const Arena> snapshot;
};

/// Runs until the first violating seller utterance. nullopt when the
/// negotiation ends without one. Backend failures throw.
std::optional<RolloutPrefix> rollout_to_first_violation(Arena& arena, const SimulationConfig& config);

/// Continues from `prefix` with x_s replaced by `remediation` and no further
/// violations. `seed` drives the continuation's randomness.
Dialogue continue_rollout(const RolloutPrefix& prefix, std::string_view remediation, const SimulationConfig& config,
                          std::uint64_t seed, std::string id = "continuation");

/// Runs `n` rollouts with seeds derive_seed(config.seed, i) on up to
/// `workers` threads; results are in index order regardless of scheduling.
std::vector<Dialogue> simulate_many(const Arena& prototype, const Remediator* remediator,
                                    const SimulationConfig& config, std::size_t n, std::size_t workers,
                                    const std::string& id_prefix);

}  // namespace negotia
