#include <gtest/gtest.h>

#include <algorithm>

#include "negotia/errors.hpp"
#include "negotia/outcome.hpp"
#include "negotia/simulation.hpp"
#include "stub_chat.hpp"
#include "support.hpp"

using namespace negotia;
using namespace negotia::testing;

namespace {

Dialogue with_outcome(std::string id, NegotiationOutcome o) {
  Dialogue d;
  d.id = std::move(id);
  d.bounds = product_bounds();
  d.turns = {buyer("hi"), seller("$50")};
  d.outcome = o;
  return d;
}

const PriceBounds kB = product_bounds();

}  // namespace

TEST(NormalizePrice, Boundaries) {
  EXPECT_EQ(normalize_price(3000, kB), 0.0);
  EXPECT_EQ(normalize_price(5000, kB), 1.0);
  EXPECT_DOUBLE_EQ(normalize_price(3700, kB), 0.35);
  EXPECT_EQ(normalize_price(2000, kB), 0.0);  // clamped
  EXPECT_EQ(normalize_price(9000, kB), 1.0);
  EXPECT_THROW(normalize_price(3000, PriceBounds{3000, 3000, 3000}), PreconditionError);
}

TEST(Reward, ThreeCases) {
  EXPECT_NEAR(reward({true, 4000, 1, 0}, kB), 0.55, 1e-12);
  EXPECT_NEAR(reward({false, std::nullopt, -1, -1}, kB), -0.3, 1e-12);
  EXPECT_NEAR(reward({true, 5000, 1, 1}, kB), 1.0, 1e-12);
}

TEST(Reward, NoDealIgnoresPrice) { EXPECT_EQ(reward({false, 5000, 0, 0}, kB), reward({false, {}, 0, 0}, kB)); }

// Property: with default weights R stays in [-0.3, 1] and is monotone in
// price, trust and business.
TEST(Reward, RangeAndMonotonicity) {
  for (Money p = 2500; p <= 5500; p += 50) {
    for (int t = -1; t <= 1; ++t) {
      for (int b = -1; b <= 1; ++b) {
        for (bool deal : {false, true}) {
          const NegotiationOutcome o{deal, deal ? std::optional<Money>(p) : std::nullopt, t, b};
          const double r = reward(o, kB);
          EXPECT_GE(r, -0.3 - 1e-12);
          EXPECT_LE(r, 1.0 + 1e-12);
          if (deal) EXPECT_GE(reward({true, p + 50, t, b}, kB), r);
          if (t < 1) EXPECT_GE(reward({deal, o.price, t + 1, b}, kB), r);
          if (b < 1) EXPECT_GE(reward({deal, o.price, t, b + 1}, kB), r);
        }
      }
    }
  }
}

TEST(Weights, ParseAndValidate) {
  const auto w = parse_weights("0.7,0.1,0.1,0.1");
  EXPECT_EQ(w.alpha, 0.7);
  EXPECT_EQ(w.epsilon, 0.1);
  EXPECT_THROW(parse_weights("1,2,3"), ValidationError);
  EXPECT_THROW(parse_weights("1,2,x,4"), ValidationError);
  EXPECT_THROW(parse_weights("1,2,inf,4"), ValidationError);
}

TEST(DialogueReward, NeedsOutcome) {
  Dialogue d = with_outcome("a", {true, 4000, 1, 0});
  EXPECT_NEAR(dialogue_reward(d), 0.55, 1e-12);
  d.outcome.reset();
  EXPECT_THROW(dialogue_reward(d), PreconditionError);
}

TEST(EvaluateCorpus, DealAndWalkAway) {
  const std::vector<Dialogue> c{with_outcome("a", {true, 4000, 1, 1}), with_outcome("b", {false, {}, -1, -1})};
  const auto r = evaluate_corpus(c);
  EXPECT_EQ(r.n, 2u);
  EXPECT_EQ(r.success_rate, 0.5);
  EXPECT_EQ(r.mean_deal_value, 40.0);
  EXPECT_EQ(r.trust_improvement_rate, 0.5);
}

TEST(EvaluateCorpus, AllTrustDeepened) {
  const std::vector<Dialogue> c{with_outcome("a", {true, 4000, 1, 0}), with_outcome("b", {false, {}, 1, 0})};
  EXPECT_EQ(evaluate_corpus(c).trust_improvement_rate, 1.0);
}

TEST(EvaluateCorpus, TenHandLabelled) {
  // deal, price, trust, business
  const std::vector<NegotiationOutcome> o{
      {true, 4000, 1, 1},  {true, 4200, 0, 1},  {false, {}, -1, -1}, {true, 3800, 1, 0}, {true, 4100, -1, 0},
      {false, {}, -1, -1}, {true, 4500, 1, 1},  {true, 3900, 0, 0},  {false, {}, 0, -1}, {true, 4300, 1, 1},
  };
  std::vector<Dialogue> c;
  for (std::size_t i = 0; i < o.size(); ++i) c.push_back(with_outcome("h" + std::to_string(i), o[i]));
  const auto r = evaluate_corpus(c);
  // Hand tally: 7 deals totalling $288 -> $41.142857...; trust +1 on 4;
  // business +1 on 4.
  EXPECT_EQ(r.n, 10u);
  EXPECT_DOUBLE_EQ(r.success_rate, 0.7);
  EXPECT_DOUBLE_EQ(*r.mean_deal_value, 288.0 / 7.0);
  EXPECT_DOUBLE_EQ(r.trust_improvement_rate, 0.4);
  EXPECT_DOUBLE_EQ(r.relation_enhancement_rate, 0.4);
  double sum = 0;
  for (const auto& x : o) sum += reward(x, kB);
  EXPECT_NEAR(r.mean_reward, sum / 10.0, 1e-12);
}

TEST(EvaluateCorpus, PermutationInvariant) {
  std::vector<Dialogue> c;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    const bool deal = rng() % 2;
    c.push_back(with_outcome("p" + std::to_string(i),
                             {deal, deal ? std::optional<Money>(3000 + static_cast<Money>(rng() % 2000)) : std::nullopt,
                              static_cast<int>(rng() % 3) - 1, static_cast<int>(rng() % 3) - 1}));
  }
  const auto base = evaluate_corpus(c);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(c.begin(), c.end(), rng);
    const auto r = evaluate_corpus(c);
    EXPECT_EQ(r.n, base.n);
    EXPECT_EQ(r.success_rate, base.success_rate);
    EXPECT_NEAR(*r.mean_deal_value, *base.mean_deal_value, 1e-9);
    EXPECT_NEAR(r.mean_reward, base.mean_reward, 1e-9);
  }
}

TEST(EvaluateCorpus, Errors) {
  EXPECT_THROW(evaluate_corpus({}), PreconditionError);
  Dialogue d = with_outcome("x", {});
  d.outcome.reset();
  EXPECT_THROW(evaluate_corpus(std::vector<Dialogue>{d}), PreconditionError);
}

TEST(EvaluateCorpus, NoDealsHasNoMeanValue) {
  const std::vector<Dialogue> c{with_outcome("a", {false, {}, -1, -1})};
  EXPECT_FALSE(evaluate_corpus(c).mean_deal_value);
}

TEST(Labels, TrustAndBusiness) {
  EXPECT_EQ(parse_trust_label("Trust Weakening"), -1);
  EXPECT_EQ(parse_trust_label("Trust Deepened"), 1);
  EXPECT_EQ(parse_trust_label("No Change"), 0);
  EXPECT_EQ(parse_trust_label("This Conversation Does Not Involve Building Trust"), 0);
  EXPECT_EQ(parse_business_label("Business Relationship Deepening"), 1);
  EXPECT_EQ(parse_business_label("Business relationship weakened."), -1);
  EXPECT_FALSE(parse_trust_label("I cannot tell."));
}

TEST(Labels, YesNoAndDeal) {
  EXPECT_EQ(parse_yes_no("Yes."), true);
  EXPECT_EQ(parse_yes_no("\"no\""), false);
  EXPECT_FALSE(parse_yes_no("maybe"));
  const auto r = parse_deal_reply("Deal: yes\nPrice: 40");
  ASSERT_TRUE(r);
  EXPECT_TRUE(r->deal);
  EXPECT_EQ(r->price, 4000);
  EXPECT_EQ(parse_deal_reply("Deal: yes\nPrice: $1,250.50")->price, 125050);
  EXPECT_FALSE(parse_deal_reply("Deal: no\nPrice: none")->deal);
  EXPECT_FALSE(parse_deal_reply("Deal: yes\nPrice: none"));
  EXPECT_FALSE(parse_deal_reply("whatever"));
}

TEST(AssessOutcome, ScriptedViolationFreeDeal) {
  // Half concessions close at $40 in one round.
  ScriptedWorld w;
  w.bounds = kB;
  w.concession_buyer = w.concession_seller = 0.5;
  ScriptedArena arena(w, templates());
  SimulationConfig cfg;
  cfg.p_c = 0.0;
  const auto d = simulate(arena, nullptr, cfg, "s");
  const auto o = assess_outcome(d, arena);
  EXPECT_TRUE(o.deal);
  EXPECT_EQ(o.price, 4000);
  EXPECT_EQ(o.trust_delta, 1);
}

TEST(AssessOutcome, RemoteJudgmentsMapLabels) {
  auto stub = std::make_shared<StubChat>([](std::span<const Message> m) -> std::string {
    const auto s = all_text(m);
    if (s.find("Deal: yes or no") != std::string::npos) return "Deal: yes\nPrice: 42";
    if (s.find("Trust Deepened") != std::string::npos) return "Trust Weakening";
    return "This Conversation Does Not Involve Building a Business Relationship";
  });
  RemoteArena arena(stub, templates(), Topic::product_sale, kB);
  Dialogue d = with_outcome("r", {});
  d.outcome.reset();
  const auto o = assess_outcome(d, arena);
  EXPECT_TRUE(o.deal);
  EXPECT_EQ(o.price, 4200);
  EXPECT_EQ(o.trust_delta, -1);
  EXPECT_EQ(o.business_delta, 0);
  EXPECT_EQ(stub->calls.size(), 3u);
  for (const auto& c : stub->calls) EXPECT_EQ(c.params.temperature, 0.0);
}

TEST(AssessOutcome, UnparseableReplyIsReaskedOnceThenNeutral) {
  auto stub = std::make_shared<StubChat>([](std::span<const Message> m) -> std::string {
    if (all_text(m).find("Deal: yes or no") != std::string::npos) return "Deal: no\nPrice: none";
    return "I would rather not say.";
  });
  RemoteArena arena(stub, templates(), Topic::product_sale, kB);
  Dialogue d = with_outcome("r", {});
  const auto o = assess_outcome(d, arena);
  EXPECT_FALSE(o.deal);
  EXPECT_EQ(o.trust_delta, 0);
  EXPECT_EQ(o.business_delta, 0);
  EXPECT_EQ(stub->calls.size(), 5u);  // deal once, trust twice, business twice
}
