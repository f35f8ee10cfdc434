#pragma once

// Baseline exemplar selection: random, embedding retrieval, and critic
// rationale augmentation.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negotia/backends.hpp"
#include "negotia/core.hpp"
#include "negotia/prompts.hpp"

namespace negotia {

/// Uniform K-sample without replacement, in sampled order.
ExemplarSet select_random(const ExemplarPool& pool, std::size_t k, std::uint64_t seed);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view text) = 0;
};

/// Character n-grams hashed (FNV-1a, 64-bit) into `dim` buckets; counts are
/// L2-normalized. Text shorter than n yields the zero vector.
class HashedNgramEmbedder : public Embedder {
 public:
  explicit HashedNgramEmbedder(std::size_t dim = 256, std::size_t n = 3);
  std::vector<double> embed(std::string_view text) override;
  std::size_t dim() const noexcept { return dim_; }
  std::size_t n() const noexcept { return n_; }

 private:
  std::size_t dim_;
  std::size_t n_;
};

std::uint64_t fnv1a64(std::string_view bytes);

/// `POST <api_base>/embeddings` through the chat client's transport.
class RemoteEmbedder : public Embedder {
 public:
  RemoteEmbedder(std::shared_ptr<RemoteChatModel> transport, std::string model);
  std::vector<double> embed(std::string_view text) override;

 private:
  std::shared_ptr<RemoteChatModel> transport_;
  std::string model_;
};

/// Cosine similarity; a zero-norm side gives -infinity.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// The text retrieval embeds for an exemplar: its history then the
/// violating seller line.
std::string retrieval_text(std::span<const Turn> history, std::string_view violation);

/// Top-K pool members by cosine similarity to the query (the conversation
/// up to and including the violating utterance); ties by id ascending.
ExemplarSet select_retrieval(const ExemplarPool& pool, std::span<const Turn> query_history,
                             std::string_view query_violation, std::size_t k, Embedder& embedder);

/// Asks the critic to review how the exemplar's remediation played out in
/// `finished` and stores the summary as the exemplar's rationale
/// (overwriting). On critic failure the exemplar comes back unchanged.
/// Throws PreconditionError if `finished` does not contain the remediation.
Exemplar rlnl_augment(const Dialogue& finished, const Exemplar& exemplar, ChatModel& critic,
                      const TemplateStore& templates, const GenParams& params = kJudgeParams);

}  // namespace negotia
