#include "negotia/backends.hpp"

#include <httplib.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "negotia/errors.hpp"

namespace negotia {

std::string_view to_string(BackendKind k) { return k == BackendKind::remote ? "remote" : "scripted"; }

BackendKind parse_backend_kind(std::string_view s) {
  if (s == "remote") return BackendKind::remote;
  if (s == "scripted") return BackendKind::scripted;
  throw ValidationError("unknown backend '" + std::string(s) + "' (expected scripted or remote)");
}

void BackendSession::validate() const {
  if (kind == BackendKind::remote && (!endpoint || endpoint->empty())) {
    throw ValidationError("remote backend needs an endpoint");
  }
  if (kind == BackendKind::remote && (!model_name || model_name->empty())) {
    throw ValidationError("remote backend needs a model name");
  }
  if (!(gen_params.temperature >= 0.0)) throw ValidationError("temperature must be >= 0");
  if (gen_params.max_tokens <= 0) throw ValidationError("max_tokens must be positive");
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string canonical_request(std::string_view model, const GenParams& params, std::span<const Message> messages) {
  // nlohmann::json (not ordered_json) sorts keys, which is what we want here.
  nlohmann::json j;
  j["model"] = model;
  j["gen_params"] = {{"temperature", params.temperature}, {"max_tokens", params.max_tokens}};
  j["messages"] = nlohmann::json::array();
  for (const auto& m : messages) j["messages"].push_back({{"role", m.role}, {"content", m.content}});
  return j.dump();
}

// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory '" + dir_.string() + "': " + ec.message());
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const { return dir_ / (key + ".json"); }

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ResponseCache::put(const std::string& key, std::string_view body) const {
  const auto final_path = path_for(key);
  auto tmp = final_path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cache entry '" + tmp.string() + "'");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot publish cache entry '" + final_path.string() + "'");
  }
}

// ---------------------------------------------------------------------------

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

Endpoint split_base(const std::string& base) {
  auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("api base '" + base + "' lacks a scheme");
  auto path_start = base.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = base.substr(0, path_start);
  e.prefix = path_start == std::string::npos ? "" : base.substr(path_start);
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

bool is_content_filter_body(const std::string& body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return false;
  const auto it = j.find("error");
  if (it == j.end() || !it->is_object()) return false;
  for (const char* field : {"code", "type"}) {
    auto f = it->find(field);
    if (f != it->end() && f->is_string()) {
      const auto s = f->get<std::string>();
      if (s == "content_filter" || s == "content_policy_violation") return true;
    }
  }
  return false;
}

}  // namespace

RemoteChatModel::RemoteChatModel(RemoteConfig config) : config_(std::move(config)) {
  if (!config_.api_key) {
    if (const char* k = std::getenv("NEGOTIA_API_KEY")) config_.api_key = k;
  }
  if (!config_.cache_dir.empty()) cache_.emplace(config_.cache_dir);
  split_base(config_.api_base);  // validate early
}

BackendStats RemoteChatModel::stats() const { return {network_calls_.load(), cache_hits_.load()}; }

std::string RemoteChatModel::post_json(const std::string& path, const std::string& body) {
  const auto ep = split_base(config_.api_base);
  httplib::Headers headers;
  if (config_.api_key) headers.emplace("Authorization", "Bearer " + *config_.api_key);

  const int attempts = 1 + std::max(0, config_.max_retries);
  std::string last_error;
  std::optional<httplib::Response> last_response;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      const auto delay = config_.backoff_base * (1 << (attempt - 1));
      spdlog::warn("request to {} failed ({}); retry {}/{} in {} ms", config_.api_base, last_error, attempt,
                   attempts - 1, delay.count());
      std::this_thread::sleep_for(delay);
    }
    httplib::Client cli(ep.origin);
    cli.set_connection_timeout(config_.timeout);
    cli.set_read_timeout(config_.timeout);
    cli.set_write_timeout(config_.timeout);
    ++network_calls_;
    auto res = cli.Post(ep.prefix + path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      last_response.reset();
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    if (res->status == 400 && is_content_filter_body(res->body)) {
      throw ContentFilterError("provider refused the request: " + res->body);
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      last_response = *res;
      continue;
    }
    throw HttpError(res->status, res->body);
  }
  if (last_response) throw HttpError(last_response->status, last_response->body);
  throw NetworkError("request to " + config_.api_base + path + " failed after " + std::to_string(attempts) +
                     " attempt(s): " + last_error);
}

std::string parse_chat_response(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("chat response is not a JSON object");
  auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw ParseError("chat response has no choices");
  }
  const auto& c = (*choices)[0];
  if (auto fr = c.find("finish_reason"); fr != c.end() && fr->is_string() && *fr == "content_filter") {
    throw ContentFilterError("completion withheld by the provider's content filter");
  }
  auto msg = c.find("message");
  if (msg == c.end() || !msg->is_object()) throw ParseError("chat response choice has no message");
  auto content = msg->find("content");
  if (content == msg->end() || content->is_null()) return {};
  if (!content->is_string()) throw ParseError("chat response content is not a string");
  return content->get<std::string>();
}

std::string RemoteChatModel::chat(std::span<const Message> messages, const GenParams& params, std::uint64_t seed) {
  if (messages.empty()) throw PreconditionError("chat needs at least one message");
  const std::string key = sha256_hex(canonical_request(config_.model, params, messages));
  if (cache_) {
    if (auto body = cache_->get(key)) {
      try {
        auto text = parse_chat_response(*body);
        ++cache_hits_;
        return text;
      } catch (const ParseError&) {
        spdlog::warn("ignoring unreadable cache entry {}", cache_->path_for(key).string());
      }
    }
  }

  nlohmann::json req;
  req["model"] = config_.model;
  req["messages"] = nlohmann::json::array();
  for (const auto& m : messages) req["messages"].push_back({{"role", m.role}, {"content", m.content}});
  req["temperature"] = params.temperature;
  req["max_tokens"] = params.max_tokens;
  req["seed"] = static_cast<std::int64_t>(seed & 0x7FFFFFFF);  // providers want a small int

  const std::string body = post_json("/chat/completions", req.dump());
  auto text = parse_chat_response(body);  // throws before caching a refusal
  if (cache_) cache_->put(key, body);
  return text;
}

}  // namespace negotia
