#include "negotia/json.hpp"

#include "negotia/errors.hpp"

namespace negotia {

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) throw ParseError("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get_as(const Json& j, const char* key) {
  const Json& v = require(j, key);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> get_opt(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

Json to_json(const Turn& t) {
  Json j;
  j["speaker"] = std::string(to_string(t.speaker));
  j["text"] = t.text;
  j["violation"] = t.violation;
  if (t.original_text) j["original_text"] = *t.original_text;
  return j;
}

Json to_json(std::span<const Turn> turns) {
  Json arr = Json::array();
  for (const auto& t : turns) arr.push_back(to_json(t));
  return arr;
}

Json to_json(const PriceBounds& b) {
  Json j;
  j["cost_price"] = b.cost_price;
  j["seller_init"] = b.seller_init;
  j["buyer_init"] = b.buyer_init;
  return j;
}

Json to_json(const NegotiationOutcome& o) {
  Json j;
  j["deal"] = o.deal;
  if (o.price) j["price"] = *o.price;
  j["trust_delta"] = o.trust_delta;
  j["business_delta"] = o.business_delta;
  return j;
}

Json to_json(const Dialogue& d) {
  Json j;
  j["id"] = d.id;
  j["topic"] = std::string(to_string(d.topic));
  j["bounds"] = to_json(d.bounds);
  j["language"] = d.language;
  j["turns"] = to_json(std::span<const Turn>(d.turns));
  if (d.outcome) j["outcome"] = to_json(*d.outcome);
  if (d.error) j["error"] = *d.error;
  if (!d.choices.empty()) {
    Json arr = Json::array();
    for (const auto& c : d.choices) {
      arr.push_back(Json{{"turn", c.turn}, {"picked", c.picked_remediation ? "remediation" : "original"}});
    }
    j["choices"] = std::move(arr);
  }
  return j;
}

Json to_json(const Exemplar& e) {
  Json j;
  j["id"] = e.id;
  j["history"] = to_json(std::span<const Turn>(e.history));
  j["violation_text"] = e.violation_text;
  j["remediation_text"] = e.remediation_text;
  if (e.rationale) j["rationale"] = *e.rationale;
  if (e.latent_quality) j["latent_quality"] = *e.latent_quality;
  if (e.provenance) j["provenance"] = *e.provenance;
  return j;
}

Json to_json(const ExemplarSet& s) {
  Json j;
  j["members"] = s.members;
  if (s.value_impact) j["value_impact"] = *s.value_impact;
  return j;
}

Turn turn_from_json(const Json& j) {
  Turn t;
  t.speaker = parse_speaker(get_as<std::string>(j, "speaker"));
  t.text = get_as<std::string>(j, "text");
  t.violation = get_opt<bool>(j, "violation").value_or(false);
  t.original_text = get_opt<std::string>(j, "original_text");
  return t;
}

std::vector<Turn> turns_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("expected an array of turns");
  std::vector<Turn> out;
  out.reserve(j.size());
  for (const auto& t : j) out.push_back(turn_from_json(t));
  return out;
}

PriceBounds bounds_from_json(const Json& j) {
  return {get_as<Money>(j, "cost_price"), get_as<Money>(j, "seller_init"), get_as<Money>(j, "buyer_init")};
}

NegotiationOutcome outcome_from_json(const Json& j) {
  NegotiationOutcome o;
  o.deal = get_as<bool>(j, "deal");
  o.price = get_opt<Money>(j, "price");
  o.trust_delta = get_as<int>(j, "trust_delta");
  o.business_delta = get_as<int>(j, "business_delta");
  return o;
}

Dialogue dialogue_from_json(const Json& j) {
  Dialogue d;
  d.id = get_as<std::string>(j, "id");
  d.topic = parse_topic(get_as<std::string>(j, "topic"));
  d.bounds = bounds_from_json(require(j, "bounds"));
  d.language = get_opt<std::string>(j, "language").value_or("en");
  d.turns = turns_from_json(require(j, "turns"));
  if (auto it = j.find("outcome"); it != j.end() && !it->is_null()) d.outcome = outcome_from_json(*it);
  d.error = get_opt<std::string>(j, "error");
  if (auto it = j.find("choices"); it != j.end() && it->is_array()) {
    for (const auto& c : *it) {
      d.choices.push_back({get_as<std::size_t>(c, "turn"), get_as<std::string>(c, "picked") == "remediation"});
    }
  }
  return d;
}

Exemplar exemplar_from_json(const Json& j) {
  Exemplar e;
  e.id = get_as<std::string>(j, "id");
  e.history = turns_from_json(require(j, "history"));
  e.violation_text = get_as<std::string>(j, "violation_text");
  e.remediation_text = get_as<std::string>(j, "remediation_text");
  e.rationale = get_opt<std::string>(j, "rationale");
  e.latent_quality = get_opt<double>(j, "latent_quality");
  e.provenance = get_opt<std::string>(j, "provenance");
  return e;
}

ExemplarSet exemplar_set_from_json(const Json& j) {
  ExemplarSet s;
  s.members = get_as<std::vector<std::string>>(j, "members");
  s.value_impact = get_opt<double>(j, "value_impact");
  return s;
}

Json parse_json(std::string_view text, std::size_t line) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line);
  }
}

Json load_json_file(const std::filesystem::path& path) {
  try {
    return parse_json(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_json_file(const std::filesystem::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

}  // namespace negotia
