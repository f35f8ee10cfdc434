#include "negotia/prompts.hpp"

#include <algorithm>
#include <cctype>

#include "negotia/errors.hpp"

#ifndef NEGOTIA_DEFAULT_PROMPTS_DIR
#define NEGOTIA_DEFAULT_PROMPTS_DIR "prompts"
#endif

namespace negotia {

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::seller_violate: return "seller_violate";
    case TemplateId::seller_normal: return "seller_normal";
    case TemplateId::buyer: return "buyer";
    case TemplateId::remediator: return "remediator";
    case TemplateId::trust_eval: return "trust_eval";
    case TemplateId::business_eval: return "business_eval";
    case TemplateId::critic: return "critic";
    case TemplateId::moderator: return "moderator";
    case TemplateId::deal_eval: return "deal_eval";
  }
  return "?";
}

TemplateId parse_template_id(std::string_view s) {
  for (auto id : kAllTemplates) {
    if (to_string(id) == s) return id;
  }
  throw ValidationError("unknown template id '" + std::string(s) + "'");
}

namespace {

bool is_upper_word_char(char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_'; }
bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool declared(std::string_view token) {
  return std::find(wildcard::all.begin(), wildcard::all.end(), token) != wildcard::all.end();
}

// Longest declared wildcard starting at `pos`, or empty.
std::string_view wildcard_at(std::string_view s, std::size_t pos) {
  std::string_view best;
  for (auto w : wildcard::all) {
    if (s.substr(pos, w.size()) == w && w.size() > best.size()) best = w;
  }
  return best;
}

std::string trim_blank_lines(const std::vector<std::string>& lines) {
  std::size_t b = 0, e = lines.size();
  auto blank = [](const std::string& l) { return l.find_first_not_of(" \t") == std::string::npos; };
  while (b < e && blank(lines[b])) ++b;
  while (e > b && blank(lines[e - 1])) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    if (i > b) out += '\n';
    out += lines[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> undeclared_wildcards(std::string_view s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '$' && i + 1 < s.size() && std::isalpha(static_cast<unsigned char>(s[i + 1]))) {
      std::size_t j = i + 1;
      while (j < s.size() && (is_word_char(s[j]) || s[j] == '-')) ++j;
      std::string_view tok = s.substr(i, j - i);
      if (!declared(tok)) out.emplace_back(tok);
      i = j;
      continue;
    }
    if (s[i] >= 'A' && s[i] <= 'Z' && (i == 0 || !is_word_char(s[i - 1]))) {
      std::size_t j = i;
      while (j < s.size() && is_upper_word_char(s[j])) ++j;
      // A lower-case continuation means an ordinary word like "Table_x".
      bool word_ends = j == s.size() || !is_word_char(s[j]);
      std::string_view tok = s.substr(i, j - i);
      if (word_ends && tok.find('_') != std::string_view::npos && tok.front() != '_' && tok.back() != '_' &&
          !declared(tok)) {
        out.emplace_back(tok);
      }
      i = j;
      continue;
    }
    ++i;
  }
  return out;
}

std::vector<std::string> PromptTemplate::wildcards() const {
  std::vector<std::string> out;
  for (const auto& m : segments) {
    for (std::size_t i = 0; i < m.content.size();) {
      auto w = wildcard_at(m.content, i);
      if (w.empty()) {
        ++i;
        continue;
      }
      if (std::find(out.begin(), out.end(), w) == out.end()) out.emplace_back(w);
      i += w.size();
    }
  }
  return out;
}

PromptTemplate parse_template(TemplateId id, std::string_view text) {
  PromptTemplate tpl{id, {}};
  std::vector<std::string> lines;
  std::string role;
  std::size_t lineno = 0;

  auto flush = [&]() {
    if (role.empty()) return;
    std::string content = trim_blank_lines(lines);
    if (content.empty()) {
      throw ParseError("template " + std::string(to_string(id)) + ": empty " + role + " segment", lineno);
    }
    tpl.segments.push_back({role, std::move(content)});
    lines.clear();
  };

  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(";;", 0) == 0) continue;

    std::string_view header = line;
    if (header == "--- SYSTEM ---" || header == "--- USER ---" || header == "--- ASSISTANT ---") {
      flush();
      role = header == "--- SYSTEM ---" ? "system" : header == "--- USER ---" ? "user" : "assistant";
      continue;
    }
    if (role.empty()) {
      if (line.find_first_not_of(" \t") != std::string::npos) {
        throw ParseError("template " + std::string(to_string(id)) + ": text before the first segment header",
                         lineno);
      }
      continue;
    }
    lines.push_back(std::move(line));
    if (end == text.size()) break;
  }
  flush();
  if (tpl.segments.empty()) throw ParseError("template " + std::string(to_string(id)) + " has no segments");

  for (const auto& m : tpl.segments) {
    auto bad = undeclared_wildcards(m.content);
    if (!bad.empty()) {
      throw ParseError("template " + std::string(to_string(id)) + ": undeclared wildcard '" + bad.front() + "'");
    }
  }
  return tpl;
}

std::vector<Message> render(const PromptTemplate& tpl, const Bindings& bindings) {
  for (const auto& w : tpl.wildcards()) {
    if (!bindings.contains(w)) {
      throw PreconditionError("template " + std::string(to_string(tpl.id)) + ": missing binding for wildcard " + w);
    }
  }
  std::vector<Message> out;
  out.reserve(tpl.segments.size());
  for (const auto& m : tpl.segments) {
    std::string content;
    content.reserve(m.content.size());
    for (std::size_t i = 0; i < m.content.size();) {
      auto w = wildcard_at(m.content, i);
      if (w.empty()) {
        content += m.content[i++];
        continue;
      }
      content += bindings.find(w)->second;
      i += w.size();
    }
    out.push_back({m.role, std::move(content)});
  }
  return out;
}

TemplateStore TemplateStore::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("prompt directory '" + dir.string() + "' does not exist");
  TemplateStore store;
  for (auto topic : {Topic::product_sale, Topic::housing_price, Topic::salary}) {
    for (auto id : kAllTemplates) {
      const std::string file = std::string(to_string(id)) + ".txt";
      fs::path p = dir / std::string(to_string(topic)) / file;
      if (!fs::exists(p)) p = dir / file;
      if (!fs::exists(p)) continue;
      try {
        store.add(topic, parse_template(id, read_file(p)));
      } catch (const ParseError& e) {
        throw ParseError(p.string() + ": " + e.what(), e.line());
      }
    }
  }
  return store;
}

void TemplateStore::add(Topic topic, PromptTemplate tpl) {
  const auto id = tpl.id;
  templates_.insert_or_assign({topic, id}, std::move(tpl));
}

bool TemplateStore::has(TemplateId id, Topic topic) const { return templates_.contains({topic, id}); }

const PromptTemplate& TemplateStore::get(TemplateId id, Topic topic) const {
  auto it = templates_.find({topic, id});
  if (it == templates_.end()) {
    throw ValidationError("template '" + std::string(to_string(id)) + "' is not loaded for topic " +
                          std::string(to_string(topic)));
  }
  return it->second;
}

std::vector<Message> TemplateStore::render(TemplateId id, Topic topic, const Bindings& bindings) const {
  return negotia::render(get(id, topic), bindings);
}

std::vector<Message> TemplateStore::render(std::string_view id, Topic topic, const Bindings& bindings) const {
  return render(parse_template_id(id), topic, bindings);
}

std::filesystem::path default_prompts_dir() { return NEGOTIA_DEFAULT_PROMPTS_DIR; }

Bindings price_bindings(const PriceBounds& b) {
  return {
      {std::string(wildcard::seller_init_price), format_money(b.seller_init)},
      {std::string(wildcard::cost_price), format_money(b.cost_price)},
      {std::string(wildcard::buyer_init_price), format_money(b.buyer_init)},
  };
}

std::string format_icl_block(std::span<const Exemplar> exemplars) {
  std::string out;
  for (const auto& e : exemplars) {
    if (!out.empty()) out += "\n\n";
    out += "# Dialogue:\n";
    for (const auto& t : e.history) {
      out += to_string(t.speaker);
      out += ": ";
      out += t.text;
      out += '\n';
    }
    out += "seller: " + e.violation_text + " [violation]\n";
    out += "# Remediation:\n" + e.remediation_text;
    if (e.rationale) out += "\n# Rationale:\n" + *e.rationale;
  }
  return out;
}

std::vector<Turn> opening_turns(const TemplateStore& store, Topic topic, const PriceBounds& bounds) {
  const auto& tpl = store.get(TemplateId::seller_normal, topic);
  const auto& segs = tpl.segments;
  std::size_t user = segs.size();
  for (std::size_t i = segs.size(); i-- > 0;) {
    if (segs[i].role == "user") {
      user = i;
      break;
    }
  }
  if (user + 1 >= segs.size() || segs[user + 1].role != "assistant") {
    throw ValidationError("seller_normal template must end with the buyer/seller opening exchange");
  }
  PromptTemplate pair{tpl.id, {segs[user], segs[user + 1]}};
  auto msgs = negotia::render(pair, price_bindings(bounds));
  return {Turn{Speaker::buyer, msgs[0].content, false, std::nullopt},
          Turn{Speaker::seller, msgs[1].content, false, std::nullopt}};
}

}  // namespace negotia
