#include "negotia/selectors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "negotia/arena.hpp"
#include "negotia/errors.hpp"
#include "negotia/rng.hpp"

namespace negotia {

ExemplarSet select_random(const ExemplarPool& pool, std::size_t k, std::uint64_t seed) {
  if (pool.size() < k) {
    throw PreconditionError("select_random: pool of " + std::to_string(pool.size()) + " is smaller than K=" +
                            std::to_string(k));
  }
  std::vector<std::string> ids;
  ids.reserve(pool.size());
  for (const auto& e : pool.items()) ids.push_back(e.id);
  Rng rng(seed);
  partial_shuffle(std::span<std::string>(ids), k, rng);
  ids.resize(k);
  return ExemplarSet{std::move(ids), std::nullopt};
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

HashedNgramEmbedder::HashedNgramEmbedder(std::size_t dim, std::size_t n) : dim_(dim), n_(n) {
  if (dim_ == 0 || n_ == 0) throw ValidationError("hashed n-gram embedder needs dim >= 1 and n >= 1");
}

std::vector<double> HashedNgramEmbedder::embed(std::string_view text) {
  std::vector<double> v(dim_, 0.0);
  if (text.size() < n_) return v;
  for (std::size_t i = 0; i + n_ <= text.size(); ++i) v[fnv1a64(text.substr(i, n_)) % dim_] += 1.0;
  double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  for (auto& x : v) x /= norm;
  return v;
}

RemoteEmbedder::RemoteEmbedder(std::shared_ptr<RemoteChatModel> transport, std::string model)
    : transport_(std::move(transport)), model_(std::move(model)) {
  if (!transport_) throw PreconditionError("RemoteEmbedder needs a transport");
}

std::vector<double> RemoteEmbedder::embed(std::string_view text) {
  nlohmann::json req{{"model", model_}, {"input", std::string(text)}};
  const auto body = transport_->post_json("/embeddings", req.dump());
  auto j = nlohmann::json::parse(body, nullptr, false);
  try {
    return j.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError("embedding response has no data[0].embedding");
  }
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("cosine_similarity: dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return -std::numeric_limits<double>::infinity();
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string retrieval_text(std::span<const Turn> history, std::string_view violation) {
  std::string text = render_conversation(history);
  if (!text.empty()) text += '\n';
  text += "seller: ";
  text += violation;
  return text;
}

ExemplarSet select_retrieval(const ExemplarPool& pool, std::span<const Turn> query_history,
                             std::string_view query_violation, std::size_t k, Embedder& embedder) {
  if (pool.size() < k) {
    throw PreconditionError("select_retrieval: pool of " + std::to_string(pool.size()) + " is smaller than K=" +
                            std::to_string(k));
  }
  const auto q = embedder.embed(retrieval_text(query_history, query_violation));
  struct Scored {
    double sim;
    const std::string* id;
  };
  std::vector<Scored> scored;
  scored.reserve(pool.size());
  for (const auto& e : pool.items()) {
    const auto v = embedder.embed(retrieval_text(e.history, e.violation_text));
    scored.push_back({cosine_similarity(q, v), &e.id});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return *a.id < *b.id;
  });
  ExemplarSet out;
  for (std::size_t i = 0; i < k; ++i) out.members.push_back(*scored[i].id);
  return out;
}

Exemplar rlnl_augment(const Dialogue& finished, const Exemplar& exemplar, ChatModel& critic,
                      const TemplateStore& templates, const GenParams& params) {
  auto it = std::find_if(finished.turns.begin(), finished.turns.end(),
                         [&](const Turn& t) { return t.text == exemplar.remediation_text; });
  if (it == finished.turns.end()) {
    throw PreconditionError("rlnl_augment: dialogue '" + finished.id + "' does not contain the remediation of '" +
                            exemplar.id + "'");
  }
  std::string conversation;
  for (auto t = finished.turns.begin(); t != finished.turns.end(); ++t) {
    if (!conversation.empty()) conversation += '\n';
    conversation += std::string(to_string(t->speaker)) + ": " + t->text;
    if (t == it) conversation += " [remediated]";
  }
  Bindings b = price_bindings(finished.bounds);
  b[std::string(wildcard::conversation)] = std::move(conversation);
  b[std::string(wildcard::last_sentence)] = exemplar.violation_text;

  Exemplar out = exemplar;
  try {
    auto msgs = templates.render(TemplateId::critic, finished.topic, b);
    auto summary = strip_violation_marker(critic.chat(msgs, params, fnv1a64(exemplar.id)));
    if (summary.empty()) throw Error("critic returned an empty summary");
    out.rationale = std::move(summary);
  } catch (const Error& e) {
    spdlog::warn("critic failed for {} ({}); exemplar left unchanged", exemplar.id, e.what());
    return exemplar;
  }
  return out;
}

}  // namespace negotia
