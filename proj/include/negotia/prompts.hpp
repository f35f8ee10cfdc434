#pragma once

// Prompt templates for every agent role, loaded from text files, and the
// wildcard renderer.
//
// Template file format: segment headers on their own line
//   --- SYSTEM ---   --- USER ---   --- ASSISTANT ---
// start a new message; lines starting with ";;" are comments.

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negotia/core.hpp"

namespace negotia {

struct Message {
  std::string role;  // system | user | assistant
  std::string content;

  bool operator==(const Message&) const = default;
};

enum class TemplateId {
  seller_violate,
  seller_normal,
  buyer,
  remediator,
  trust_eval,
  business_eval,
  critic,
  moderator,
  deal_eval,
};

inline constexpr std::array<TemplateId, 9> kAllTemplates = {
    TemplateId::seller_violate, TemplateId::seller_normal, TemplateId::buyer,
    TemplateId::remediator,     TemplateId::trust_eval,    TemplateId::business_eval,
    TemplateId::critic,         TemplateId::moderator,     TemplateId::deal_eval,
};

std::string_view to_string(TemplateId id);
/// Throws ValidationError for an unknown id.
TemplateId parse_template_id(std::string_view s);

namespace wildcard {
inline constexpr std::string_view icl_examples = "$ICL-Examples";
inline constexpr std::string_view conversation = "$CONVERSATION";
inline constexpr std::string_view last_sentence = "$LAST_SENTENCE";
inline constexpr std::string_view seller_init_price = "SELLER_INIT_PRICE";
inline constexpr std::string_view cost_price = "COST_PRICE";
inline constexpr std::string_view buyer_init_price = "BUYER_INIT_PRICE";
inline constexpr std::array<std::string_view, 6> all = {icl_examples,      conversation, last_sentence,
                                                        seller_init_price, cost_price,   buyer_init_price};
}  // namespace wildcard

using Bindings = std::map<std::string, std::string, std::less<>>;

struct PromptTemplate {
  TemplateId id = TemplateId::seller_normal;
  std::vector<Message> segments;

  /// Declared wildcards that occur somewhere in the segments.
  std::vector<std::string> wildcards() const;
};

/// Parses template text. Throws ParseError on a malformed layout or an
/// undeclared wildcard-looking token.
PromptTemplate parse_template(TemplateId id, std::string_view text);

/// Tokens shaped like wildcards ($Name or UPPER_CASE) that are not declared.
std::vector<std::string> undeclared_wildcards(std::string_view content);

/// Substitutes every binding in one left-to-right pass. Throws
/// PreconditionError naming the first wildcard with no binding.
std::vector<Message> render(const PromptTemplate& tpl, const Bindings& bindings);

class TemplateStore {
 public:
  /// Loads `<dir>/<topic>/<id>.txt`, falling back to `<dir>/<id>.txt`.
  /// Missing files are allowed; asking for them later is an error.
  static TemplateStore load(const std::filesystem::path& dir);

  void add(Topic topic, PromptTemplate tpl);
  bool has(TemplateId id, Topic topic) const;
  const PromptTemplate& get(TemplateId id, Topic topic) const;

  std::vector<Message> render(TemplateId id, Topic topic, const Bindings& bindings) const;
  std::vector<Message> render(std::string_view id, Topic topic, const Bindings& bindings) const;

 private:
  std::map<std::pair<Topic, TemplateId>, PromptTemplate> templates_;
};

/// Directory the build was configured with.
std::filesystem::path default_prompts_dir();

/// SELLER_INIT_PRICE, COST_PRICE, BUYER_INIT_PRICE formatted as money.
Bindings price_bindings(const PriceBounds& bounds);

/// One "# Dialogue:" block per exemplar, blank-line separated.
std::string format_icl_block(std::span<const Exemplar> exemplars);

/// The two hard-coded opening turns (buyer question, seller answer) taken
/// from the seller_normal template.
std::vector<Turn> opening_turns(const TemplateStore& store, Topic topic, const PriceBounds& bounds);

}  // namespace negotia
