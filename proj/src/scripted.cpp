#include "negotia/scripted.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "negotia/errors.hpp"

namespace negotia {

ScriptedWorld ScriptedWorld::standard(Topic topic, PriceBounds bounds) {
  ScriptedWorld w;
  w.topic = topic;
  w.bounds = bounds;
  w.close_tolerance = (bounds.seller_init - bounds.buyer_init) / 40;
  return w;
}

void ScriptedWorld::validate() const {
  if (!(concession_buyer > 0 && concession_buyer < 1)) throw ValidationError("concession_buyer must be in (0,1)");
  if (!(concession_seller > 0 && concession_seller < 1)) throw ValidationError("concession_seller must be in (0,1)");
  if (max_rounds < 1) throw ValidationError("max_rounds must be >= 1");
  if (close_tolerance < 0) throw ValidationError("close_tolerance must be >= 0");
  if (!(bounds.buyer_init < bounds.seller_init)) throw ValidationError("bounds: buyer_init must be < seller_init");
}

BargainState BargainState::initial(const ScriptedWorld& world) {
  BargainState s;
  s.bid = world.bounds.buyer_init;
  s.ask = world.bounds.seller_init;
  s.prev_ask = world.bounds.seller_init;
  s.goodwill = world.initial_goodwill;
  return s;
}

namespace {

std::string_view unit_suffix(Topic t) {
  switch (t) {
    case Topic::product_sale: return " per unit";
    case Topic::housing_price: return "";
    case Topic::salary: return " per month";
  }
  return "";
}

template <std::size_t N>
std::string pick(const std::array<const char*, N>& variants, Rng& rng, const std::string& a, const std::string& b) {
  std::string t = variants[uniform_index(rng, N)];
  auto put = [&](const char* key, const std::string& v) {
    for (auto p = t.find(key); p != std::string::npos; p = t.find(key, p + v.size())) t.replace(p, 2, v);
  };
  put("%a", a);
  put("%b", b);
  return t;
}

constexpr std::array<const char*, 3> kBuyerCounter = {
    "Could you accept %a?",
    "How about %a? That is closer to our budget.",
    "We can go up to %a.",
};
constexpr std::array<const char*, 3> kSellerCounter = {
    "I can come down to %a.",
    "Considering a long-term cooperation, %a would be fair.",
    "Let's meet partway: %a.",
};
constexpr std::array<const char*, 3> kSellerViolation = {
    "%b? That offer is frankly insulting. %a, take it or leave it.",
    "Stop wasting my time with lowball numbers. %a is final.",
    "You clearly have no idea what quality costs. My price is %a.",
};
constexpr std::array<const char*, 2> kBuyerDeal = {
    "Agreed, %a works for us. Let's close the deal.",
    "Deal at %a. Thank you for your flexibility.",
};
constexpr std::array<const char*, 2> kBuyerWalkAway = {
    "This attitude makes it impossible to continue. We will look for another partner.",
    "I am sorry, but we cannot work together under these conditions. Goodbye.",
};
constexpr std::array<const char*, 2> kBuyerTimeout = {
    "We are still too far apart, so we will stop here. Thank you for your time.",
    "It seems we cannot reach an agreement. Let's end the negotiation here.",
};

Money round_money(double v) { return static_cast<Money>(std::llround(v)); }

}  // namespace

StepResult scripted_step(const ScriptedWorld& world, const BargainState& state, Speaker role,
                         std::span<const Turn> trajectory, Rng& rng, bool violate, std::optional<Money> amount) {
  if (state.terminal()) throw PreconditionError("scripted_step called after the negotiation ended");
  if (role != state.next) throw PreconditionError("scripted_step: it is not the " + std::string(to_string(role)) + "'s turn");
  if (state.round > world.max_rounds) throw PreconditionError("scripted_step: round limit exceeded");

  BargainState s = state;
  const std::string unit(unit_suffix(world.topic));
  auto money = [&](Money m) { return format_money(m) + unit; };

  if (role == Speaker::seller) {
    s.prev_ask = s.ask;
    s.ask = amount ? *amount : round_money(static_cast<double>(s.ask) - world.concession_seller * static_cast<double>(s.ask - s.bid));
    std::string text;
    if (violate) {
      s.goodwill -= 1.0;
      s.pending_violation = true;
      ++s.violations;
      text = pick(kSellerViolation, rng, money(s.ask), format_money(s.bid));
    } else {
      text = pick(kSellerCounter, rng, money(s.ask), format_money(s.bid));
    }
    s.next = Speaker::buyer;
    return {std::move(text), std::move(s)};
  }

  // Buyer.
  s.next = Speaker::seller;
  if (!s.opened) {
    s.opened = true;
    s.bid = amount ? *amount : world.bounds.buyer_init;
    uniform_index(rng, 2);  // keep one draw per step
    return {"Would you consider " + format_money(s.bid) + unit + "?", std::move(s)};
  }

  if (s.pending_violation) {
    std::optional<double> q;
    if (!trajectory.empty() && trajectory.back().speaker == Speaker::seller) q = parse_quality_tag(trajectory.back().text);
    // A zero-quality rewrite restores nothing and reads as no remediation.
    if (q && *q > 0.0) {
      const double qc = std::min(*q, 1.0);
      s.goodwill = std::min(world.initial_goodwill, s.goodwill + qc);
      s.remediation_qualities.push_back(qc);
    } else {
      ++s.unremediated;
    }
    s.pending_violation = false;
  }

  if (s.goodwill <= 0.0) {
    s.phase = BargainPhase::walk_away;
    return {pick(kBuyerWalkAway, rng, "", ""), std::move(s)};
  }

  ++s.round;
  const double gf = std::max(s.goodwill, 0.0) / 2.0;
  const Money previous_bid = s.bid;
  s.bid = amount ? *amount
                 : round_money(static_cast<double>(previous_bid) +
                               world.concession_buyer * static_cast<double>(s.prev_ask - previous_bid) * gf);

  if (s.ask - s.bid <= world.close_tolerance || s.bid >= s.ask) {
    s.phase = BargainPhase::deal;
    s.price = round_money((static_cast<double>(s.bid) + static_cast<double>(s.ask)) / 2.0);
    return {pick(kBuyerDeal, rng, money(*s.price), ""), std::move(s)};
  }
  if (s.round >= world.max_rounds) {
    s.phase = BargainPhase::walk_away;
    s.timed_out = true;
    return {pick(kBuyerTimeout, rng, "", ""), std::move(s)};
  }
  return {pick(kBuyerCounter, rng, money(s.bid), ""), std::move(s)};
}

BargainState force_terminate(BargainState state) {
  if (!state.terminal()) {
    if (state.pending_violation) {
      ++state.unremediated;
      state.pending_violation = false;
    }
    state.phase = BargainPhase::walk_away;
    state.timed_out = true;
  }
  return state;
}

NegotiationOutcome scripted_outcome(const ScriptedWorld&, const BargainState& state) {
  if (!state.terminal()) throw PreconditionError("scripted_outcome needs a terminal state");
  NegotiationOutcome o;
  if (state.phase != BargainPhase::deal) {
    o.deal = false;
    o.trust_delta = -1;
    o.business_delta = -1;
    return o;
  }
  o.deal = true;
  o.price = state.price;

  const auto& qs = state.remediation_qualities;
  const double sum = std::accumulate(qs.begin(), qs.end(), 0.0);
  if (state.unremediated > 0) {
    o.trust_delta = -1;
  } else if (qs.empty() || sum / static_cast<double>(qs.size()) >= 1.0) {
    o.trust_delta = 1;
  } else {
    o.trust_delta = 0;
  }
  // Unremediated violations count as quality 0; no violations at all counts as 1.
  const std::size_t n = qs.size() + static_cast<std::size_t>(state.unremediated);
  const double mean = n == 0 ? 1.0 : sum / static_cast<double>(n);
  o.business_delta = mean >= 0.5 ? 1 : 0;
  return o;
}

std::string quality_tag(double q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "{quality=%.3f}", std::clamp(q, 0.0, 1.0));
  return buf;
}

std::optional<double> parse_quality_tag(std::string_view text) {
  constexpr std::string_view key = "{quality=";
  auto p = text.rfind(key);
  if (p == std::string_view::npos) return std::nullopt;
  auto end = text.find('}', p);
  if (end == std::string_view::npos) return std::nullopt;
  std::string num(text.substr(p + key.size(), end - p - key.size()));
  char* stop = nullptr;
  double v = std::strtod(num.c_str(), &stop);
  if (num.empty() || stop != num.c_str() + num.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<Money> money_amounts(std::string_view text) {
  std::vector<Money> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '$' || i + 1 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i + 1]))) continue;
    std::size_t j = i + 1;
    Money whole = 0;
    while (j < text.size()) {
      const char c = text[j];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        whole = whole * 10 + (c - '0');
      } else if (c == ',' && j + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        // thousands separator
      } else {
        break;
      }
      ++j;
    }
    Money cents = 0;
    if (j + 1 < text.size() && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
      cents = (text[j + 1] - '0') * 10;
      j += 2;
      if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) cents += text[j++] - '0';
    }
    out.push_back(whole * 100 + cents);
    i = j - 1;
  }
  return out;
}

std::optional<Money> last_money_amount(std::string_view text) {
  auto all = money_amounts(text);
  if (all.empty()) return std::nullopt;
  return all.back();
}

std::string scripted_remediation(std::string_view violation, double q) {
  std::string text = "I understand your position and value our cooperation.";
  if (auto m = last_money_amount(violation)) text += " Would " + format_money(*m) + " work for you?";
  return text + " " + quality_tag(q);
}

double hashed_quality(std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;
}

}  // namespace negotia
