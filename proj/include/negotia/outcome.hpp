#pragma once

// Reward, outcome assessment, and corpus metrics.

#include <optional>
#include <span>
#include <string_view>

#include "negotia/core.hpp"

namespace negotia {

class Arena;

struct RewardWeights {
  double alpha = 0.7;    // price
  double beta = 0.1;     // deal
  double gamma = 0.1;    // trust
  double epsilon = 0.1;  // business

  void validate() const;
};

/// "a,b,g,e" -> weights. Throws ValidationError.
RewardWeights parse_weights(std::string_view csv);

/// Price position within [buyer_init, seller_init], clamped to [0,1].
/// Throws PreconditionError when the interval is empty.
double normalize_price(Money price, const PriceBounds& bounds);

/// alpha*v_price + beta*b_deal + gamma*trust + epsilon*business with
/// b_deal = +1/-1 and v_price = 0 without a deal.
double reward(const NegotiationOutcome& outcome, const PriceBounds& bounds, const RewardWeights& weights = {});

/// Reward of a finished dialogue. Throws PreconditionError without an outcome.
double dialogue_reward(const Dialogue& d, const RewardWeights& weights = {});

/// Evaluator verdict for a terminal dialogue.
NegotiationOutcome assess_outcome(const Dialogue& d, Arena& evaluator);

struct MetricsReport {
  std::size_t n = 0;
  double success_rate = 0;
  std::optional<double> mean_deal_value;  // major currency units, deals only
  double trust_improvement_rate = 0;
  double relation_enhancement_rate = 0;
  double mean_reward = 0;

  bool operator==(const MetricsReport&) const = default;
};

/// Throws PreconditionError on an empty corpus or a dialogue without outcome.
MetricsReport evaluate_corpus(std::span<const Dialogue> dialogues, const RewardWeights& weights = {});

// Evaluator reply parsing for the remote backend.
std::optional<int> parse_trust_label(std::string_view reply);
std::optional<int> parse_business_label(std::string_view reply);
std::optional<bool> parse_yes_no(std::string_view reply);

struct DealReply {
  bool deal = false;
  std::optional<Money> price;
};
/// "Deal: yes\nPrice: 40" style replies.
std::optional<DealReply> parse_deal_reply(std::string_view reply);

}  // namespace negotia
