#include "negotia/simulation.hpp"

#include <spdlog/spdlog.h>

#include "negotia/errors.hpp"
#include "negotia/parallel.hpp"

namespace negotia {

void SimulationConfig::validate() const {
  if (!(p_c >= 0.0 && p_c <= 1.0)) throw ValidationError("p_c must be in [0,1]");
  if (max_turns < 3) throw ValidationError("max_turns must leave room after the two opening turns");
}

bool moderator_end(Arena& arena, std::span<const Turn> tau, std::size_t max_turns) {
  if (tau.size() >= max_turns) return true;
  if (tau.size() <= 2) return false;
  return arena.ended(tau);
}

namespace {

enum class Stop { ended, forced, violation };

struct Loop {
  Arena& arena;
  const SimulationConfig& config;
  Rng* coin = nullptr;  // null: violations suppressed
  const Remediator* remediator = nullptr;
  bool stop_at_violation = false;
  bool had_violation = false;
  std::optional<Turn> held;  // the violating turn when stopping there

  Stop run(std::vector<Turn>& tau) {
    while (true) {
      if (tau.size() >= config.max_turns) return Stop::forced;
      const Speaker next = tau.size() % 2 == 0 ? Speaker::buyer : Speaker::seller;
      if (next == Speaker::buyer) {
        tau.push_back({Speaker::buyer, arena.speak(Speaker::buyer, tau, false), false, std::nullopt});
      } else {
        bool head = false;
        if (coin && !(config.single_remediation_point && had_violation)) head = bernoulli(*coin, config.p_c);
        Turn t{Speaker::seller, seller_text(tau, head), head, std::nullopt};
        if (t.violation) {
          had_violation = true;
          if (stop_at_violation) {
            held = std::move(t);
            return Stop::violation;
          }
          if (remediator) remediate(tau, t);
        }
        tau.push_back(std::move(t));
      }
      if (moderator_end(arena, tau, config.max_turns)) {
        return tau.size() >= config.max_turns && !arena.ended(tau) ? Stop::forced : Stop::ended;
      }
    }
  }

  std::string seller_text(std::span<const Turn> tau, bool& head) {
    if (!head) return arena.speak(Speaker::seller, tau, false);
    try {
      return arena.speak(Speaker::seller, tau, true);
    } catch (const ContentFilterError& e) {
      // The provider refused to role-play the violation; carry on politely.
      spdlog::warn("violating seller turn refused by the provider ({}); using a normal turn", e.what());
      head = false;
      return arena.speak(Speaker::seller, tau, false);
    }
  }

  void remediate(std::span<const Turn> history, Turn& t) {
    std::string y;
    try {
      y = (*remediator)(history, t.text);
    } catch (const Error& e) {
      spdlog::warn("remediation failed ({}); keeping the original utterance", e.what());
    }
    t.original_text = t.text;
    if (!y.empty()) t.text = std::move(y);
  }
};

void finish(Dialogue& d, Arena& arena, Stop stop) {
  auto outcome = arena.assess(d.turns);
  if (stop == Stop::forced) {
    outcome.deal = false;
    outcome.price.reset();
  }
  d.outcome = outcome;
}

}  // namespace

Dialogue simulate(Arena& arena, const Remediator* remediator, const SimulationConfig& config, std::string id) {
  config.validate();
  Dialogue d;
  d.id = std::move(id);
  d.topic = arena.topic();
  d.bounds = arena.bounds();

  Rng coin(derive_seed(config.seed, 0));
  arena.reseed(derive_seed(config.seed, 1));
  Loop loop{arena, config, &coin, config.remediation_enabled ? remediator : nullptr};
  try {
    d.turns = arena.opening();
    finish(d, arena, loop.run(d.turns));
  } catch (const Error& e) {
    d.error = e.what();
    d.outcome.reset();
    spdlog::warn("rollout {} aborted: {}", d.id, e.what());
  }
  return d;
}

std::optional<RolloutPrefix> rollout_to_first_violation(Arena& arena, const SimulationConfig& config) {
  config.validate();
  Rng coin(derive_seed(config.seed, 0));
  arena.reseed(derive_seed(config.seed, 1));
  Loop loop{arena, config, &coin, nullptr, true};
  std::vector<Turn> tau = arena.opening();
  if (loop.run(tau) != Stop::violation) return std::nullopt;
  return RolloutPrefix{std::move(tau), std::move(*loop.held), std::shared_ptr<const Arena>(arena.clone())};
}

Dialogue continue_rollout(const RolloutPrefix& prefix, std::string_view remediation, const SimulationConfig& config,
                          std::uint64_t seed, std::string id) {
  if (remediation.empty()) throw PreconditionError("continue_rollout: remediation text is empty");
  if (!prefix.snapshot) throw PreconditionError("continue_rollout: prefix has no agent snapshot");
  config.validate();

  auto arena = prefix.snapshot->clone();
  arena->reseed(seed);
  Dialogue d;
  d.id = std::move(id);
  d.topic = arena->topic();
  d.bounds = arena->bounds();
  d.turns = prefix.history;
  Turn t = prefix.violation;
  t.original_text = t.text;
  t.text = std::string(remediation);
  d.turns.push_back(std::move(t));

  Loop loop{*arena, config, nullptr, nullptr};
  loop.had_violation = true;
  try {
    Stop stop = moderator_end(*arena, d.turns, config.max_turns)
                    ? (d.turns.size() >= config.max_turns && !arena->ended(d.turns) ? Stop::forced : Stop::ended)
                    : loop.run(d.turns);
    finish(d, *arena, stop);
  } catch (const Error& e) {
    d.error = e.what();
    d.outcome.reset();
  }
  return d;
}

std::vector<Dialogue> simulate_many(const Arena& prototype, const Remediator* remediator,
                                    const SimulationConfig& config, std::size_t n, std::size_t workers,
                                    const std::string& id_prefix) {
  config.validate();
  std::vector<Dialogue> out(n);
  parallel_for(n, workers, [&](std::size_t i) {
    auto arena = prototype.clone();
    SimulationConfig c = config;
    c.seed = derive_seed(config.seed, i);
    out[i] = simulate(*arena, remediator, c, id_prefix + std::to_string(i));
  });
  return out;
}

}  // namespace negotia
