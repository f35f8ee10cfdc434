#include "negotia/core.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "negotia/errors.hpp"
#include "negotia/json.hpp"

namespace negotia {

std::string_view to_string(Speaker s) { return s == Speaker::buyer ? "buyer" : "seller"; }

std::string_view to_string(Topic t) {
  switch (t) {
    case Topic::product_sale: return "product_sale";
    case Topic::housing_price: return "housing_price";
    case Topic::salary: return "salary";
  }
  return "product_sale";
}

Speaker parse_speaker(std::string_view s) {
  if (s == "buyer") return Speaker::buyer;
  if (s == "seller") return Speaker::seller;
  throw ParseError("unknown speaker '" + std::string(s) + "'");
}

Topic parse_topic(std::string_view s) {
  if (s == "product_sale") return Topic::product_sale;
  if (s == "housing_price") return Topic::housing_price;
  if (s == "salary") return Topic::salary;
  throw ParseError("unknown topic '" + std::string(s) + "'");
}

std::string format_money(Money m) {
  std::string sign = m < 0 ? "-" : "";
  Money a = m < 0 ? -m : m;
  std::string out = sign + "$" + std::to_string(a / 100);
  if (a % 100 != 0) {
    Money cents = a % 100;
    out += (cents < 10 ? ".0" : ".") + std::to_string(cents);
  }
  return out;
}

PriceBounds default_bounds(Topic topic) {
  switch (topic) {
    case Topic::product_sale: return {3'500, 5'000, 3'000};
    case Topic::housing_price: return {62'000'000, 66'000'000, 60'000'000};
    case Topic::salary: return {320'000, 380'000, 300'000};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_turn(const Turn& t, std::size_t i, std::vector<std::string>& out) {
  const std::string where = "turn " + std::to_string(i) + ": ";
  if (t.text.empty()) out.push_back(where + "text is empty");
  if (t.original_text && !t.violation) out.push_back(where + "original_text present but violation=false");
}

}  // namespace

std::vector<std::string> validate_dialogue(const Dialogue& d) {
  std::vector<std::string> out;
  if (d.id.empty()) out.emplace_back("id is empty");
  if (!(d.bounds.buyer_init < d.bounds.seller_init)) out.emplace_back("bounds: buyer_init must be < seller_init");
  if (!(d.bounds.cost_price <= d.bounds.seller_init)) out.emplace_back("bounds: cost_price must be <= seller_init");

  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const Turn& t = d.turns[i];
    check_turn(t, i, out);
    // Opening is buyer then seller, strict alternation afterwards.
    const Speaker expected = i % 2 == 0 ? Speaker::buyer : Speaker::seller;
    if (t.speaker != expected) {
      out.push_back("turn " + std::to_string(i) + ": speaker alternation broken (expected " +
                    std::string(to_string(expected)) + ")");
    }
    if (t.violation && t.speaker != Speaker::seller) {
      out.push_back("turn " + std::to_string(i) + ": violation flagged on a buyer turn");
    }
  }

  if (d.outcome) {
    const auto& o = *d.outcome;
    if (o.deal && !o.price) out.emplace_back("outcome: deal without price");
    if (o.trust_delta < -1 || o.trust_delta > 1) out.emplace_back("outcome: trust_delta outside {-1,0,1}");
    if (o.business_delta < -1 || o.business_delta > 1) out.emplace_back("outcome: business_delta outside {-1,0,1}");
  }
  for (const auto& c : d.choices) {
    if (c.turn >= d.turns.size()) out.push_back("choice refers to missing turn " + std::to_string(c.turn));
  }
  return out;
}

std::vector<std::string> validate_exemplar(const Exemplar& e) {
  std::vector<std::string> out;
  if (e.id.empty()) out.emplace_back("id is empty");
  if (e.violation_text.empty()) out.emplace_back("violation_text is empty");
  if (e.remediation_text.empty()) out.emplace_back("remediation_text is empty");
  for (std::size_t i = 0; i < e.history.size(); ++i) {
    check_turn(e.history[i], i, out);
    if (i > 0 && e.history[i].speaker == e.history[i - 1].speaker) {
      out.push_back("history turn " + std::to_string(i) + ": speakers do not alternate");
    }
  }
  if (e.latent_quality && !(*e.latent_quality >= 0.0 && *e.latent_quality <= 1.0)) {
    out.emplace_back("latent_quality outside [0,1]");
  }
  return out;
}

std::vector<std::string> validate_exemplar_set(const ExemplarSet& s, std::optional<std::size_t> k) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& m : s.members) {
    if (!seen.insert(m).second) out.push_back("duplicate member '" + m + "'");
  }
  if (k && s.members.size() != *k) {
    out.push_back("expected " + std::to_string(*k) + " members, got " + std::to_string(s.members.size()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exemplar extraction

ExtractionResult extract_exemplars(const Dialogue& d) {
  ExtractionResult result;
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const Turn& t = d.turns[i];
    if (!t.violation) continue;
    if (!t.original_text) {
      ++result.skipped_unremediated;
      continue;
    }
    Exemplar e;
    e.id = d.id + "#" + std::to_string(i);
    e.history.assign(d.turns.begin(), d.turns.begin() + static_cast<std::ptrdiff_t>(i));
    e.violation_text = *t.original_text;
    e.remediation_text = t.text;
    result.exemplars.push_back(std::move(e));
  }
  return result;
}

std::string render_conversation(std::span<const Turn> turns) {
  std::string out;
  for (const auto& t : turns) {
    if (!out.empty()) out += '\n';
    out += to_string(t.speaker);
    out += ": ";
    out += t.text;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

namespace {

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    f(line, lineno);
  }
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

std::string serialize_dialogue(const Dialogue& d) { return to_json(d).dump(); }

Dialogue parse_dialogue(std::string_view json_line) { return dialogue_from_json(parse_json(json_line)); }

std::vector<Dialogue> load_dialogues(const std::filesystem::path& path) {
  std::vector<Dialogue> out;
  for_each_line(path, [&](const std::string& line, std::size_t lineno) {
    Dialogue d;
    try {
      d = dialogue_from_json(parse_json(line, lineno));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what(), lineno);
    }
    if (auto problems = validate_dialogue(d); !problems.empty()) {
      throw ValidationError("dialogue '" + d.id + "' (" + path.string() + ":" + std::to_string(lineno) +
                            "): " + join(problems));
    }
    out.push_back(std::move(d));
  });
  return out;
}

void save_dialogues(const std::filesystem::path& path, std::span<const Dialogue> dialogues) {
  std::string out;
  for (const auto& d : dialogues) {
    out += serialize_dialogue(d);
    out += '\n';
  }
  write_file(path, out);
}

std::string serialize_exemplar(const Exemplar& e) { return to_json(e).dump(); }

Exemplar parse_exemplar(std::string_view json_line) { return exemplar_from_json(parse_json(json_line)); }

ExemplarPool::ExemplarPool(std::vector<Exemplar> items) : items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i].id, i).second) {
      throw ValidationError("duplicate exemplar id '" + items_[i].id + "'");
    }
  }
}

ExemplarPool ExemplarPool::load(const std::filesystem::path& path) {
  std::vector<Exemplar> items;
  for_each_line(path, [&](const std::string& line, std::size_t lineno) {
    Exemplar e;
    try {
      e = exemplar_from_json(parse_json(line, lineno));
    } catch (const ParseError& err) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + err.what(), lineno);
    }
    if (auto problems = validate_exemplar(e); !problems.empty()) {
      throw ValidationError("exemplar '" + e.id + "': " + join(problems));
    }
    items.push_back(std::move(e));
  });
  return ExemplarPool(std::move(items));
}

void ExemplarPool::save(const std::filesystem::path& path) const {
  std::string out;
  for (const auto& e : items_) {
    out += serialize_exemplar(e);
    out += '\n';
  }
  write_file(path, out);
}

const Exemplar& ExemplarPool::at(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw ValidationError("unknown exemplar id '" + std::string(id) + "'");
  return items_[it->second];
}

bool ExemplarPool::contains(std::string_view id) const { return index_.contains(std::string(id)); }

std::vector<Exemplar> ExemplarPool::resolve(const ExemplarSet& set) const {
  std::vector<Exemplar> out;
  out.reserve(set.members.size());
  for (const auto& id : set.members) out.push_back(at(id));
  return out;
}

ExemplarSet load_exemplar_set(const std::filesystem::path& path) {
  return exemplar_set_from_json(load_json_file(path));
}

void save_exemplar_set(const std::filesystem::path& path, const ExemplarSet& set) {
  save_json_file(path, to_json(set));
}

}  // namespace negotia
