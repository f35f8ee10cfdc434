#pragma once

// Chat backends: the model interface, an OpenAI-compatible HTTP client with a
// content-addressed response cache, and session configuration.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "negotia/json.hpp"
#include "negotia/prompts.hpp"

namespace negotia {

struct GenParams {
  double temperature = 0.0;
  int max_tokens = 256;

  bool operator==(const GenParams&) const = default;
};

/// Negotiators sample; judges, remediator and critic are greedy.
inline constexpr GenParams kNegotiatorParams{1.0, 256};
inline constexpr GenParams kJudgeParams{0.0, 256};

class ChatModel {
 public:
  virtual ~ChatModel() = default;
  /// Assistant completion for `messages`. Must be safe for concurrent callers.
  virtual std::string chat(std::span<const Message> messages, const GenParams& params, std::uint64_t seed) = 0;
};

enum class BackendKind { remote, scripted };

std::string_view to_string(BackendKind k);
BackendKind parse_backend_kind(std::string_view s);

struct BackendSession {
  BackendKind kind = BackendKind::scripted;
  std::optional<std::string> endpoint;
  std::optional<std::string> model_name;
  GenParams gen_params;
  std::uint64_t seed = 0;

  /// Throws ValidationError when a remote session lacks endpoint or model.
  void validate() const;
};

std::string sha256_hex(std::string_view data);

/// Canonical serialization of the parts of a request that identify it.
/// The sampling seed is deliberately not part of it.
std::string canonical_request(std::string_view model, const GenParams& params, std::span<const Message> messages);

/// Directory of `<sha256>.json` files holding raw response bodies.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;
  /// Write-then-rename, so readers never see a partial entry.
  void put(const std::string& key, std::string_view body) const;
  std::filesystem::path path_for(const std::string& key) const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
};

struct RemoteConfig {
  std::string api_base = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  std::optional<std::string> api_key;  // defaults to $NEGOTIA_API_KEY
  std::filesystem::path cache_dir;     // empty disables caching
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::seconds timeout{60};
};

struct BackendStats {
  std::uint64_t network_calls = 0;
  std::uint64_t cache_hits = 0;
};

/// Sends `POST <api_base>/chat/completions`. Transport errors, 429 and 5xx
/// are retried with doubling backoff; other non-2xx statuses raise HttpError;
/// provider refusals raise ContentFilterError.
class RemoteChatModel : public ChatModel {
 public:
  explicit RemoteChatModel(RemoteConfig config);

  std::string chat(std::span<const Message> messages, const GenParams& params, std::uint64_t seed) override;

  BackendStats stats() const;
  const RemoteConfig& config() const noexcept { return config_; }

  /// POST a JSON body to `<api_base><path>` with the retry policy and
  /// return the 2xx response body. Shared with the embedding client.
  std::string post_json(const std::string& path, const std::string& body);

 private:
  RemoteConfig config_;
  std::optional<ResponseCache> cache_;
  std::atomic<std::uint64_t> network_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
};

/// Extracts the completion text from a chat-completions response body.
std::string parse_chat_response(std::string_view body);

}  // namespace negotia
