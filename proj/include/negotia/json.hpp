#pragma once

// JSON conversions for the domain types. Field order is fixed so that
// serialized records are byte-stable.

#include <json.hpp>  // vendored nlohmann/json

#include "negotia/core.hpp"

namespace negotia {

using Json = nlohmann::ordered_json;

Json to_json(const Turn& t);
Json to_json(const PriceBounds& b);
Json to_json(const NegotiationOutcome& o);
Json to_json(const Dialogue& d);
Json to_json(const Exemplar& e);
Json to_json(const ExemplarSet& s);
Json to_json(std::span<const Turn> turns);

Turn turn_from_json(const Json& j);
PriceBounds bounds_from_json(const Json& j);
NegotiationOutcome outcome_from_json(const Json& j);
Dialogue dialogue_from_json(const Json& j);
Exemplar exemplar_from_json(const Json& j);
ExemplarSet exemplar_set_from_json(const Json& j);
std::vector<Turn> turns_from_json(const Json& j);

/// Parses a JSON document, rethrowing syntax errors as ParseError.
Json parse_json(std::string_view text, std::size_t line = 0);
Json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace negotia
