#pragma once

// The agents of one negotiation (seller, buyer, moderator, evaluator) behind
// a single interface, so the rollout engine does not care whether they are
// scripted or remote.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "negotia/backends.hpp"
#include "negotia/core.hpp"
#include "negotia/prompts.hpp"
#include "negotia/scripted.hpp"

namespace negotia {

class Arena {
 public:
  virtual ~Arena() = default;

  virtual Topic topic() const = 0;
  virtual const PriceBounds& bounds() const = 0;
  /// The hard-coded buyer question and seller answer.
  virtual std::vector<Turn> opening() const = 0;

  /// Next utterance for `role` after `tau`. `violate` asks the seller for a
  /// norm-violating utterance.
  virtual std::string speak(Speaker role, std::span<const Turn> tau, bool violate) = 0;
  /// `tau.back()` was written by a human playing `role`.
  virtual void observe(Speaker role, std::span<const Turn> tau) = 0;

  /// Moderator: has the negotiation concluded?
  virtual bool ended(std::span<const Turn> tau) = 0;
  /// Evaluator. Also called on trajectories cut off at the turn cap.
  virtual NegotiationOutcome assess(std::span<const Turn> tau) = 0;

  virtual std::unique_ptr<Arena> clone() const = 0;
  virtual void reseed(std::uint64_t seed) = 0;
};

class ScriptedArena : public Arena {
 public:
  ScriptedArena(ScriptedWorld world, std::shared_ptr<const TemplateStore> templates, std::uint64_t seed = 0);

  Topic topic() const override { return world_.topic; }
  const PriceBounds& bounds() const override { return world_.bounds; }
  std::vector<Turn> opening() const override;
  std::string speak(Speaker role, std::span<const Turn> tau, bool violate) override;
  void observe(Speaker role, std::span<const Turn> tau) override;
  bool ended(std::span<const Turn> tau) override;
  NegotiationOutcome assess(std::span<const Turn> tau) override;
  std::unique_ptr<Arena> clone() const override;
  void reseed(std::uint64_t seed) override;

  const BargainState& state() const noexcept { return state_; }
  const ScriptedWorld& world() const noexcept { return world_; }

 private:
  ScriptedWorld world_;
  std::shared_ptr<const TemplateStore> templates_;
  BargainState state_;
  Rng rng_;
};

struct RemoteRoles {
  GenParams negotiator = kNegotiatorParams;
  GenParams judge = kJudgeParams;
};

/// Every role is played by prompting `model` with the role's template.
class RemoteArena : public Arena {
 public:
  RemoteArena(std::shared_ptr<ChatModel> model, std::shared_ptr<const TemplateStore> templates, Topic topic,
              PriceBounds bounds, RemoteRoles roles = {}, std::uint64_t seed = 0);

  Topic topic() const override { return topic_; }
  const PriceBounds& bounds() const override { return bounds_; }
  std::vector<Turn> opening() const override;
  std::string speak(Speaker role, std::span<const Turn> tau, bool violate) override;
  void observe(Speaker, std::span<const Turn>) override {}
  bool ended(std::span<const Turn> tau) override;
  NegotiationOutcome assess(std::span<const Turn> tau) override;
  std::unique_ptr<Arena> clone() const override;
  void reseed(std::uint64_t seed) override;

 private:
  std::string ask(const std::vector<Message>& messages, const GenParams& params);

  std::shared_ptr<ChatModel> model_;
  std::shared_ptr<const TemplateStore> templates_;
  Topic topic_;
  PriceBounds bounds_;
  RemoteRoles roles_;
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
};

/// Removes "[violation]" markers a violating seller prompt asks the model to
/// emit, and trims surrounding whitespace.
std::string strip_violation_marker(std::string_view text);

}  // namespace negotia
