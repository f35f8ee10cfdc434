#include "negotia/outcome.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "negotia/arena.hpp"
#include "negotia/errors.hpp"

namespace negotia {

void RewardWeights::validate() const {
  for (double w : {alpha, beta, gamma, epsilon}) {
    if (!std::isfinite(w)) throw ValidationError("reward weights must be finite");
  }
}

RewardWeights parse_weights(std::string_view csv) {
  std::vector<double> parts;
  std::stringstream ss{std::string(csv)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("weights: '" + item + "' is not a number");
    }
  }
  if (parts.size() != 4) throw ValidationError("weights: expected four comma-separated numbers a,b,g,e");
  RewardWeights w{parts[0], parts[1], parts[2], parts[3]};
  w.validate();
  return w;
}

double normalize_price(Money price, const PriceBounds& b) {
  if (b.seller_init == b.buyer_init) throw PreconditionError("normalize_price: seller_init equals buyer_init");
  const double v = static_cast<double>(price - b.buyer_init) / static_cast<double>(b.seller_init - b.buyer_init);
  return std::clamp(v, 0.0, 1.0);
}

double reward(const NegotiationOutcome& o, const PriceBounds& b, const RewardWeights& w) {
  const double v_price = o.deal && o.price ? normalize_price(*o.price, b) : 0.0;
  const double b_deal = o.deal ? 1.0 : -1.0;
  return w.alpha * v_price + w.beta * b_deal + w.gamma * o.trust_delta + w.epsilon * o.business_delta;
}

double dialogue_reward(const Dialogue& d, const RewardWeights& w) {
  if (!d.outcome) throw PreconditionError("dialogue '" + d.id + "' has no outcome");
  return reward(*d.outcome, d.bounds, w);
}

NegotiationOutcome assess_outcome(const Dialogue& d, Arena& evaluator) {
  if (d.turns.size() < 2) throw PreconditionError("assess_outcome: dialogue '" + d.id + "' is not terminal");
  return evaluator.assess(d.turns);
}

MetricsReport evaluate_corpus(std::span<const Dialogue> dialogues, const RewardWeights& w) {
  if (dialogues.empty()) throw PreconditionError("evaluate_corpus: empty corpus");
  MetricsReport r;
  r.n = dialogues.size();
  std::size_t deals = 0, trust = 0, business = 0;
  double price_sum = 0, reward_sum = 0;
  for (const auto& d : dialogues) {
    if (!d.outcome) throw PreconditionError("evaluate_corpus: dialogue '" + d.id + "' has no outcome");
    const auto& o = *d.outcome;
    if (o.deal && o.price) {
      ++deals;
      price_sum += static_cast<double>(*o.price) / 100.0;
    }
    if (o.trust_delta == 1) ++trust;
    if (o.business_delta == 1) ++business;
    reward_sum += reward(o, d.bounds, w);
  }
  const double n = static_cast<double>(r.n);
  r.success_rate = static_cast<double>(deals) / n;
  if (deals > 0) r.mean_deal_value = price_sum / static_cast<double>(deals);
  r.trust_improvement_rate = static_cast<double>(trust) / n;
  r.relation_enhancement_rate = static_cast<double>(business) / n;
  r.mean_reward = reward_sum / n;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool has(const std::string& s, std::string_view needle) { return s.find(needle) != std::string::npos; }

std::optional<int> parse_four_way(std::string_view reply) {
  const auto s = lower(reply);
  // The not-applicable label mentions "deepening" too, so test it first.
  if (has(s, "does not involve") || has(s, "not applicable")) return 0;
  if (has(s, "deepen")) return 1;
  if (has(s, "weaken")) return -1;
  if (has(s, "no change")) return 0;
  return std::nullopt;
}

}  // namespace

std::optional<int> parse_trust_label(std::string_view reply) { return parse_four_way(reply); }
std::optional<int> parse_business_label(std::string_view reply) { return parse_four_way(reply); }

std::optional<bool> parse_yes_no(std::string_view reply) {
  auto s = lower(reply);
  const auto b = s.find_first_not_of(" \t\r\n\"'*");
  if (b == std::string::npos) return std::nullopt;
  s = s.substr(b);
  if (s.rfind("yes", 0) == 0) return true;
  if (s.rfind("no", 0) == 0) return false;
  return std::nullopt;
}

std::optional<DealReply> parse_deal_reply(std::string_view reply) {
  const auto s = lower(reply);
  const auto d = s.find("deal:");
  if (d == std::string::npos) return std::nullopt;
  auto verdict = parse_yes_no(std::string_view(s).substr(d + 5));
  if (!verdict) return std::nullopt;
  DealReply r{*verdict, std::nullopt};
  if (!r.deal) return r;

  const auto p = s.find("price:");
  if (p == std::string::npos) return std::nullopt;
  std::string num;
  bool seen_dot = false;
  for (std::size_t i = p + 6; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      num += c;
    } else if (c == '.' && !seen_dot && !num.empty()) {
      seen_dot = true;
      num += c;
    } else if (c == ',' && !num.empty()) {
      continue;
    } else if (!num.empty()) {
      break;
    }
    if (c == '\n' && num.empty()) break;
  }
  if (num.empty() || num.back() == '.') return std::nullopt;
  r.price = static_cast<Money>(std::llround(std::stod(num) * 100.0));
  return r;
}

}  // namespace negotia
