#include "silverforge/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "silverforge/errors.hpp"
#include "silverforge/store.hpp"
#include "silverforge/text.hpp"

namespace silverforge::backend {

using json = nlohmann::json;

std::string to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

Role role_from(const std::string& s) {
  if (s == "system") return Role::System;
  if (s == "user") return Role::User;
  if (s == "assistant") return Role::Assistant;
  throw ConfigError("unknown chat role: \"" + s + "\"");
}

void check_request(const ChatRequest& req) {
  if (req.messages.empty()) throw ConfigError("chat request has no messages");
  if (req.messages.back().role != Role::User) {
    throw ConfigError("chat request must end with a user message");
  }
  if (req.temperature < 0) throw ConfigError("temperature must be >= 0");
  if (req.max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  for (const auto& m : req.messages) {
    if (m.content.empty() && m.role != Role::Assistant) {
      throw ConfigError("empty content on a " + to_string(m.role) + " message");
    }
  }
}

std::string render_request(const ChatRequest& req) {
  std::string out = "seed=";
  out += req.seed ? std::to_string(*req.seed) : "none";
  out += '\n';
  for (const auto& m : req.messages) {
    out += to_string(m.role);
    out += ": ";
    out += m.content;
    out += '\n';
  }
  return out;
}

std::string to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::None: return "none";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::RateLimited: return "rate_limited";
    case ErrorKind::Protocol: return "protocol";
    case ErrorKind::AuthMissing: return "auth_missing";
  }
  return "protocol";
}

std::string complete_text(Backend& b, const ChatRequest& req) {
  Completion c = b.complete(req);
  if (!c.ok) {
    throw BackendError("backend failed (" + to_string(c.kind) + "): " + c.error);
  }
  return c.text;
}

std::vector<Completion> complete_batch(Backend& b,
                                       const std::vector<ChatRequest>& requests) {
  std::vector<Completion> results(requests.size());
  if (requests.empty()) return results;
  const int workers =
      std::max(1, std::min<int>(b.max_concurrency(), static_cast<int>(requests.size())));
  std::atomic<size_t> next{0};
  auto run = [&] {
    for (size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1)) {
      try {
        results[i] = b.complete(requests[i]);
      } catch (const std::exception& e) {
        results[i].ok = false;
        results[i].kind = ErrorKind::Protocol;
        results[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  return results;
}

// ---------------------------------------------------------------------------
// HTTP backend

namespace {

bool is_local_endpoint(const std::string& url) {
  for (const char* host : {"localhost", "127.0.0.1", "[::1]", "0.0.0.0"}) {
    if (url.find(std::string("://") + host) != std::string::npos) return true;
  }
  return false;
}

json wire_body(const std::string& model_name, const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  json body{{"model", model_name},
            {"messages", messages},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens}};
  if (req.seed) body["seed"] = *req.seed;
  return body;
}

std::string excerpt(const std::string& body) {
  return body.size() <= 200 ? body : body.substr(0, 200) + "...";
}

}  // namespace

HttpBackend::HttpBackend(model::BackendConfig config) : config_(std::move(config)) {
  if (config_.max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
  if (config_.timeout_s <= 0) throw ConfigError("timeout_s must be > 0");
}

Completion HttpBackend::complete(const ChatRequest& req) {
  Completion result;
  check_request(req);

  std::string api_key;
  if (!config_.api_key_env_var_name.empty()) {
    const char* v = std::getenv(config_.api_key_env_var_name.c_str());
    if (v != nullptr) {
      api_key = v;
    } else if (!is_local_endpoint(config_.endpoint_url)) {
      result.kind = ErrorKind::AuthMissing;
      result.error = "environment variable " + config_.api_key_env_var_name +
                     " is unset and endpoint is not local";
      return result;
    }
  }

  httplib::Client client(config_.endpoint_url);
  const auto timeout = std::chrono::milliseconds(
      static_cast<long>(config_.timeout_s * 1000.0));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  const std::string body = wire_body(config_.model_name, req).dump();

  std::mt19937_64 jitter_rng(std::random_device{}());
  int64_t backoff_ms = std::max(1, config_.backoff_base_ms);

  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    ++result.attempts;
    httplib::Result res =
        client.Post("/v1/chat/completions", headers, body, "application/json");

    if (!res) {  // transport failure: connect/read timeout or refused
      result.kind = ErrorKind::Timeout;
      result.error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 429 || res->status >= 500) {
      result.kind = res->status == 429 ? ErrorKind::RateLimited : ErrorKind::Protocol;
      result.error = "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body);
    } else if (res->status != 200) {  // non-retryable client error
      result.kind = ErrorKind::Protocol;
      result.error = "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body);
      return result;
    } else {
      json parsed = json::parse(res->body, nullptr, false);
      if (parsed.is_discarded() || !parsed.contains("choices") ||
          parsed["choices"].empty()) {
        result.kind = ErrorKind::Protocol;
        result.error = "unparseable completion body: " + excerpt(res->body);
        return result;
      }
      result.ok = true;
      result.kind = ErrorKind::None;
      result.error.clear();
      result.text = parsed["choices"][0]["message"]["content"].get<std::string>();
      return result;
    }

    if (attempt < config_.max_retries) {
      std::uniform_int_distribution<int64_t> jitter(0, backoff_ms);
      std::this_thread::sleep_for(std::chrono::milliseconds(jitter(jitter_rng)));
      backoff_ms *= 2;
    }
  }
  return result;  // retries exhausted; kind/error reflect the last failure
}

// ---------------------------------------------------------------------------
// Mock backend

void MockBackend::load_scenarios(const std::filesystem::path& path) {
  store::JsonlReader reader(path);
  json rec;
  while (reader.next(rec)) {
    add_scenario(rec.at("prompt_sha256").get<std::string>(),
                 rec.at("response").get<std::string>());
  }
}

void MockBackend::add_scenario(const std::string& prompt_sha256,
                               const std::string& response) {
  table_[prompt_sha256] = response;
}

std::string MockBackend::key_for(const ChatRequest& req) {
  return text::sha256_hex(render_request(req));
}

Completion MockBackend::complete(const ChatRequest& req) {
  calls_.fetch_add(1);
  int now = in_flight_.fetch_add(1) + 1;
  int peak = peak_in_flight_.load();
  while (now > peak && !peak_in_flight_.compare_exchange_weak(peak, now)) {
  }
  if (delay_ms_ > 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
  }

  Completion result;
  result.attempts = 1;
  try {
    check_request(req);
    const std::string& last = req.messages.back().content;
    if (text::starts_with(last, "echo:")) {
      result.ok = true;
      result.text = last.substr(5);
    } else if (auto it = table_.find(key_for(req)); it != table_.end()) {
      result.ok = true;
      result.text = it->second;
    } else if (fallback_) {
      result.ok = true;
      result.text = *fallback_;
    } else {
      result.kind = ErrorKind::Protocol;
      result.error = "no scenario for prompt key " + key_for(req);
    }
  } catch (const std::exception& e) {
    result.kind = ErrorKind::Protocol;
    result.error = e.what();
  }

  in_flight_.fetch_sub(1);
  return result;
}

void write_scenario_file(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& sha_response_pairs) {
  std::vector<json> records;
  records.reserve(sha_response_pairs.size());
  for (const auto& [sha, response] : sha_response_pairs) {
    records.push_back(json{{"prompt_sha256", sha}, {"response", response}});
  }
  store::write_stream(records, path, model::Stage::Raw);
}

}  // namespace silverforge::backend
