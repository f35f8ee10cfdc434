#include "negotia/arena.hpp"

#include <spdlog/spdlog.h>

#include "negotia/errors.hpp"
#include "negotia/outcome.hpp"

namespace negotia {

std::string strip_violation_marker(std::string_view text) {
  std::string s(text);
  constexpr std::string_view marker = "[violation]";
  for (auto p = s.find(marker); p != std::string::npos; p = s.find(marker, p)) s.erase(p, marker.size());
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// ---------------------------------------------------------------------------

ScriptedArena::ScriptedArena(ScriptedWorld world, std::shared_ptr<const TemplateStore> templates, std::uint64_t seed)
    : world_(std::move(world)), templates_(std::move(templates)), state_(BargainState::initial(world_)), rng_(seed) {
  world_.validate();
  if (!templates_) throw PreconditionError("ScriptedArena needs a template store for the opening turns");
}

std::vector<Turn> ScriptedArena::opening() const { return opening_turns(*templates_, world_.topic, world_.bounds); }

std::string ScriptedArena::speak(Speaker role, std::span<const Turn> tau, bool violate) {
  auto r = scripted_step(world_, state_, role, tau, rng_, role == Speaker::seller && violate);
  state_ = std::move(r.state);
  return std::move(r.utterance);
}

void ScriptedArena::observe(Speaker role, std::span<const Turn> tau) {
  if (tau.empty()) throw PreconditionError("observe needs the human turn");
  const Turn& t = tau.back();
  auto r = scripted_step(world_, state_, role, tau, rng_, role == Speaker::seller && t.violation,
                         last_money_amount(t.original_text.value_or(t.text)));
  state_ = std::move(r.state);
}

bool ScriptedArena::ended(std::span<const Turn>) { return state_.terminal(); }

NegotiationOutcome ScriptedArena::assess(std::span<const Turn>) {
  return scripted_outcome(world_, force_terminate(state_));
}

std::unique_ptr<Arena> ScriptedArena::clone() const { return std::make_unique<ScriptedArena>(*this); }

void ScriptedArena::reseed(std::uint64_t seed) { rng_.seed(seed); }

// ---------------------------------------------------------------------------

RemoteArena::RemoteArena(std::shared_ptr<ChatModel> model, std::shared_ptr<const TemplateStore> templates, Topic topic,
                         PriceBounds bounds, RemoteRoles roles, std::uint64_t seed)
    : model_(std::move(model)),
      templates_(std::move(templates)),
      topic_(topic),
      bounds_(bounds),
      roles_(roles),
      seed_(seed) {
  if (!model_ || !templates_) throw PreconditionError("RemoteArena needs a model and a template store");
}

std::vector<Turn> RemoteArena::opening() const { return opening_turns(*templates_, topic_, bounds_); }

std::string RemoteArena::ask(const std::vector<Message>& messages, const GenParams& params) {
  return model_->chat(messages, params, derive_seed(seed_, calls_++));
}

namespace {

// Appends tau[from..] to a role prompt; `self` speaks as the assistant.
void append_turns(std::vector<Message>& msgs, std::span<const Turn> tau, std::size_t from, Speaker self) {
  for (std::size_t i = from; i < tau.size(); ++i) {
    msgs.push_back({tau[i].speaker == self ? "assistant" : "user", tau[i].text});
  }
}

Bindings conversation_bindings(std::span<const Turn> tau, const PriceBounds& b) {
  Bindings bind = price_bindings(b);
  bind.emplace(std::string(wildcard::conversation), render_conversation(tau));
  return bind;
}

}  // namespace

std::string RemoteArena::speak(Speaker role, std::span<const Turn> tau, bool violate) {
  if (tau.size() < 2) throw PreconditionError("speak needs the opening turns");
  if (role == Speaker::seller) {
    auto msgs = templates_->render(violate ? TemplateId::seller_violate : TemplateId::seller_normal, topic_,
                                   price_bindings(bounds_));
    append_turns(msgs, tau, 2, Speaker::seller);
    auto text = strip_violation_marker(ask(msgs, roles_.negotiator));
    if (text.empty()) throw Error("seller model returned an empty reply");
    return text;
  }
  auto msgs = templates_->render(TemplateId::buyer, topic_, price_bindings(bounds_));
  if (tau.size() == 2) {
    // The buyer's first bid is the template's closing line.
    for (auto it = msgs.rbegin(); it != msgs.rend(); ++it) {
      if (it->role == "assistant") return it->content;
    }
    throw ValidationError("buyer template has no assistant line for the first bid");
  }
  append_turns(msgs, tau, 3, Speaker::buyer);
  auto text = strip_violation_marker(ask(msgs, roles_.negotiator));
  if (text.empty()) throw Error("buyer model returned an empty reply");
  return text;
}

bool RemoteArena::ended(std::span<const Turn> tau) {
  if (tau.size() <= 2) return false;
  try {
    auto msgs = templates_->render(TemplateId::moderator, topic_, conversation_bindings(tau, bounds_));
    auto verdict = parse_yes_no(ask(msgs, roles_.judge));
    if (!verdict) {
      spdlog::warn("moderator reply was neither yes nor no; continuing");
      return false;
    }
    return *verdict;
  } catch (const Error& e) {
    spdlog::warn("moderator failed ({}); continuing", e.what());
    return false;
  }
}

NegotiationOutcome RemoteArena::assess(std::span<const Turn> tau) {
  const auto bind = conversation_bindings(tau, bounds_);

  // One re-ask on an unparseable reply, then fall back.
  auto judged = [&]<typename T>(TemplateId id, auto parse, T fallback) -> T {
    auto msgs = templates_->render(id, topic_, bind);
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (auto v = parse(ask(msgs, roles_.judge))) return *v;
    }
    spdlog::warn("unparseable {} reply; treating as not applicable", to_string(id));
    return fallback;
  };

  NegotiationOutcome o;
  auto deal = judged(TemplateId::deal_eval, parse_deal_reply, DealReply{});
  o.deal = deal.deal && deal.price.has_value();
  if (o.deal) o.price = deal.price;
  o.trust_delta = judged(TemplateId::trust_eval, parse_trust_label, 0);
  o.business_delta = judged(TemplateId::business_eval, parse_business_label, 0);
  return o;
}

std::unique_ptr<Arena> RemoteArena::clone() const { return std::make_unique<RemoteArena>(*this); }

void RemoteArena::reseed(std::uint64_t seed) {
  seed_ = seed;
  calls_ = 0;
}

}  // namespace negotia
