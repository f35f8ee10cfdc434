#pragma once

// Domain types for negotiation dialogues and ICL exemplar pools, plus their
// validation and JSON-lines IO.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace negotia {

/// Money in integer minor units (cents).
using Money = std::int64_t;

enum class Speaker { buyer, seller };
enum class Topic { product_sale, housing_price, salary };

std::string_view to_string(Speaker s);
std::string_view to_string(Topic t);
Speaker parse_speaker(std::string_view s);
Topic parse_topic(std::string_view s);

/// "$50" for whole amounts, "$39.75" otherwise.
std::string format_money(Money m);

struct Turn {
  Speaker speaker = Speaker::buyer;
  std::string text;
  bool violation = false;
  /// Raw utterance that a remediation replaced.
  std::optional<std::string> original_text;

  bool operator==(const Turn&) const = default;
};

struct PriceBounds {
  Money cost_price = 0;   // seller reserve
  Money seller_init = 0;
  Money buyer_init = 0;

  bool operator==(const PriceBounds&) const = default;
};

/// Default bounds for a topic (see README for the values).
PriceBounds default_bounds(Topic topic);

struct NegotiationOutcome {
  bool deal = false;
  std::optional<Money> price;
  int trust_delta = 0;     // -1, 0, +1
  int business_delta = 0;  // -1, 0, +1

  bool operator==(const NegotiationOutcome&) const = default;
};

/// A human decision in an interactive session: keep the flagged original or
/// take the remediation.
struct RemediationChoice {
  std::size_t turn = 0;
  bool picked_remediation = false;

  bool operator==(const RemediationChoice&) const = default;
};

struct Dialogue {
  std::string id;
  Topic topic = Topic::product_sale;
  PriceBounds bounds;
  std::string language = "en";
  std::vector<Turn> turns;
  std::optional<NegotiationOutcome> outcome;
  /// Set when a rollout aborted; such dialogues are partial.
  std::optional<std::string> error;
  std::vector<RemediationChoice> choices;

  bool operator==(const Dialogue&) const = default;
};

struct Exemplar {
  std::string id;
  std::vector<Turn> history;
  std::string violation_text;
  std::string remediation_text;
  std::optional<std::string> rationale;
  /// Test fixtures only: drives the scripted oracle.
  std::optional<double> latent_quality;
  std::optional<std::string> provenance;

  bool operator==(const Exemplar&) const = default;
};

struct ExemplarSet {
  std::vector<std::string> members;
  std::optional<double> value_impact;

  bool operator==(const ExemplarSet&) const = default;
};

/// Every failed invariant of `d`, empty when the dialogue is valid.
std::vector<std::string> validate_dialogue(const Dialogue& d);
std::vector<std::string> validate_exemplar(const Exemplar& e);
/// Checks distinct members and, when `k` is given, the set size.
std::vector<std::string> validate_exemplar_set(const ExemplarSet& s, std::optional<std::size_t> k = {});

struct ExtractionResult {
  std::vector<Exemplar> exemplars;
  /// Violation turns skipped because they carry no remediation.
  std::size_t skipped_unremediated = 0;
};

ExtractionResult extract_exemplars(const Dialogue& d);

/// Lines "buyer: ..." / "seller: ..." joined with '\n'.
std::string render_conversation(std::span<const Turn> turns);

// JSON-lines IO. Loading validates every record; errors name the line number
// (parse) or the record id (invariants).
std::vector<Dialogue> load_dialogues(const std::filesystem::path& path);
void save_dialogues(const std::filesystem::path& path, std::span<const Dialogue> dialogues);
std::string serialize_dialogue(const Dialogue& d);
Dialogue parse_dialogue(std::string_view json_line);

std::string serialize_exemplar(const Exemplar& e);
Exemplar parse_exemplar(std::string_view json_line);

/// An exemplar pool with id lookup. Ids are unique.
class ExemplarPool {
 public:
  ExemplarPool() = default;
  explicit ExemplarPool(std::vector<Exemplar> items);

  static ExemplarPool load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  const std::vector<Exemplar>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  const Exemplar& at(std::string_view id) const;
  bool contains(std::string_view id) const;
  /// Exemplars of `set` in member order.
  std::vector<Exemplar> resolve(const ExemplarSet& set) const;

 private:
  std::vector<Exemplar> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

ExemplarSet load_exemplar_set(const std::filesystem::path& path);
void save_exemplar_set(const std::filesystem::path& path, const ExemplarSet& set);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace negotia
