#include "negotia/remediate.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

#include "negotia/arena.hpp"
#include "negotia/errors.hpp"
#include "negotia/scripted.hpp"

namespace negotia {

RemediationPolicy RemediationPolicy::with_exemplars(std::vector<Exemplar> z) const {
  RemediationPolicy p = *this;
  p.exemplars = std::move(z);
  return p;
}

std::vector<Message> remediation_prompt(const RemediationPolicy& policy, std::span<const Turn> history,
                                        std::string_view violation) {
  if (!policy.templates) throw PreconditionError("remediation policy has no template store");
  std::string conversation = render_conversation(history);
  if (!conversation.empty()) conversation += '\n';
  conversation += "seller: " + std::string(violation) + " [violation]";

  Bindings b = price_bindings(default_bounds(policy.topic));
  b[std::string(wildcard::icl_examples)] = format_icl_block(policy.exemplars);
  b[std::string(wildcard::conversation)] = std::move(conversation);
  b[std::string(wildcard::last_sentence)] = std::string(violation);
  return policy.templates->render(TemplateId::remediator, policy.topic, b);
}

double scripted_policy_quality(const RemediationPolicy& policy) {
  if (policy.exemplars.empty()) return policy.zero_shot_quality;
  double sum = 0;
  for (const auto& e : policy.exemplars) sum += e.latent_quality.value_or(policy.zero_shot_quality);
  return std::clamp(sum / static_cast<double>(policy.exemplars.size()), 0.0, 1.0);
}

std::string remediate(const RemediationPolicy& policy, std::span<const Turn> history, std::string_view violation) {
  if (violation.empty()) throw PreconditionError("remediate: violating utterance is empty");
  const auto prompt = remediation_prompt(policy, history, violation);
  if (!policy.model) return scripted_remediation(violation, scripted_policy_quality(policy));

  for (int attempt = 0; attempt < 2; ++attempt) {
    auto text = strip_violation_marker(policy.model->chat(prompt, policy.params, derive_seed(policy.seed, attempt)));
    if (!text.empty()) return text;
  }
  spdlog::warn("no-remediation: remediator returned nothing twice; keeping the original utterance");
  return std::string(violation);
}

Remediator make_remediator(RemediationPolicy policy) {
  return [p = std::move(policy)](std::span<const Turn> history, std::string_view violation) {
    return remediate(p, history, violation);
  };
}

AnnotationResult silver_annotate(std::span<const Dialogue> corpus, const RemediationPolicy& zero_shot) {
  const RemediationPolicy policy = zero_shot.with_exemplars({});
  AnnotationResult out;
  for (const auto& d : corpus) {
    RemediationPolicy p = policy;
    p.topic = d.topic;
    for (std::size_t i = 0; i < d.turns.size(); ++i) {
      const Turn& t = d.turns[i];
      if (!t.violation) continue;
      Exemplar e;
      e.id = d.id + "#" + std::to_string(i);
      e.history.assign(d.turns.begin(), d.turns.begin() + static_cast<std::ptrdiff_t>(i));
      e.violation_text = t.original_text.value_or(t.text);
      try {
        e.remediation_text = remediate(p, e.history, e.violation_text);
      } catch (const Error& err) {
        out.failures.push_back(e.id + ": " + err.what());
        spdlog::warn("annotation of {} failed: {}", e.id, err.what());
        continue;
      }
      e.provenance = "silver";
      if (!p.model) e.latent_quality = hashed_quality(e.id);
      out.pool.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace negotia
