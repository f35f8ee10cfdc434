#pragma once

// The ICL remediation policy: exemplars + remediator prompt + model.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negotia/backends.hpp"
#include "negotia/core.hpp"
#include "negotia/prompts.hpp"
#include "negotia/simulation.hpp"

namespace negotia {

struct RemediationPolicy {
  std::vector<Exemplar> exemplars;  // empty: zero-shot
  std::shared_ptr<ChatModel> model;  // null: scripted remediator
  std::shared_ptr<const TemplateStore> templates;
  Topic topic = Topic::product_sale;
  GenParams params = kJudgeParams;
  /// Scripted quality of a zero-shot rewrite, and of exemplars without a
  /// latent quality.
  double zero_shot_quality = 0.5;
  std::uint64_t seed = 0;

  RemediationPolicy with_exemplars(std::vector<Exemplar> z) const;
};

/// The rendered remediator prompt for (h_<s, x_s).
std::vector<Message> remediation_prompt(const RemediationPolicy& policy, std::span<const Turn> history,
                                        std::string_view violation);

/// Scripted remediation quality of a policy: mean latent quality of its
/// exemplars, or the zero-shot quality for an empty set.
double scripted_policy_quality(const RemediationPolicy& policy);

/// A single rewritten sentence. An empty completion is retried once, then
/// `violation` is returned unchanged. Backend errors propagate.
std::string remediate(const RemediationPolicy& policy, std::span<const Turn> history, std::string_view violation);

Remediator make_remediator(RemediationPolicy policy);

struct AnnotationResult {
  std::vector<Exemplar> pool;
  std::vector<std::string> failures;  // "<dialogue id>#<turn>: <error>"
};

/// Zero-shot rewrite of every violation turn in `corpus`. With the scripted
/// remediator, each exemplar also gets a hashed latent quality.
AnnotationResult silver_annotate(std::span<const Dialogue> corpus, const RemediationPolicy& zero_shot);

}  // namespace negotia
