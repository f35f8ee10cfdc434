#pragma once

// Deterministic concession-bargaining world used in place of LLM agents.
//
// Round k >= 1: the seller asks s_k = s_{k-1} - c_s (s_{k-1} - b_{k-1}), then
// the buyer bids b_k = b_{k-1} + c_b (s_{k-1} - b_{k-1}) * max(g, 0) / 2.
// A seller violation costs one unit of goodwill g; a remediation of quality q
// gives q back when the buyer reads it. The quality rides along in the
// remediated text as a "{quality=0.900}" tag.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negotia/core.hpp"
#include "negotia/rng.hpp"

namespace negotia {

struct ScriptedWorld {
  Topic topic = Topic::product_sale;
  PriceBounds bounds;
  double concession_buyer = 0.3;
  double concession_seller = 0.2;
  double initial_goodwill = 2.0;
  int max_rounds = 10;
  Money close_tolerance = 0;

  /// Default concessions, tolerance = (seller_init - buyer_init) / 40.
  static ScriptedWorld standard(Topic topic, PriceBounds bounds);
  void validate() const;
};

enum class BargainPhase { open, deal, walk_away };

struct BargainState {
  Speaker next = Speaker::buyer;
  bool opened = false;  // buyer has stated b_0
  int round = 0;
  Money bid = 0;
  Money ask = 0;
  Money prev_ask = 0;
  double goodwill = 0;
  bool pending_violation = false;
  int violations = 0;
  int unremediated = 0;
  std::vector<double> remediation_qualities;
  BargainPhase phase = BargainPhase::open;
  bool timed_out = false;
  std::optional<Money> price;

  static BargainState initial(const ScriptedWorld& world);
  bool terminal() const noexcept { return phase != BargainPhase::open; }

  bool operator==(const BargainState&) const = default;
};

struct StepResult {
  std::string utterance;
  BargainState state;
};

/// One move for `role`. `violate` only applies to the seller. `amount`
/// replaces the computed bid/ask (a human typed a number). The buyer reads the
/// remediation tag, if any, from the last seller turn of `trajectory`.
/// Throws PreconditionError after a terminal state or out of turn.
StepResult scripted_step(const ScriptedWorld& world, const BargainState& state, Speaker role,
                         std::span<const Turn> trajectory, Rng& rng, bool violate = false,
                         std::optional<Money> amount = std::nullopt);

/// Ends a still-open negotiation as a walk-away (turn cap reached).
BargainState force_terminate(BargainState state);

/// Throws PreconditionError if `state` is not terminal.
NegotiationOutcome scripted_outcome(const ScriptedWorld& world, const BargainState& state);

std::string quality_tag(double q);
std::optional<double> parse_quality_tag(std::string_view text);

/// Every "$1,234.56"-style amount in `text`, in cents.
std::vector<Money> money_amounts(std::string_view text);
std::optional<Money> last_money_amount(std::string_view text);

/// The scripted remediator's rewrite of `violation` at quality `q`.
std::string scripted_remediation(std::string_view violation, double q);

/// Stable pseudo-latent quality in [0,1] derived from an exemplar id.
double hashed_quality(std::string_view id);

}  // namespace negotia
