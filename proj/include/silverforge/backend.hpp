#pragma once
// Chat-completion clients: an HTTP backend speaking the common
// chat-completions wire protocol, and a deterministic mock backend driven
// by a scenario table so every pipeline behavior is testable offline.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "silverforge/datamodel.hpp"

namespace silverforge::backend {

enum class Role { System, User, Assistant };

std::string to_string(Role r);  // "system" | "user" | "assistant"
Role role_from(const std::string& s);

struct ChatMessage {
  Role role = Role::User;
  std::string content;  // non-empty for user/system roles
};

struct ChatRequest {
  std::vector<ChatMessage> messages;  // non-empty; last message is user
  double temperature = 0.0;
  std::optional<int64_t> seed;
  int max_tokens = 1024;
};

// Throws ConfigError when a request invariant is violated.
void check_request(const ChatRequest& req);

// Canonical plain-text rendering of a request, used both for mock scenario
// keys and for debuggability: "seed=<n|none>\n" then one "<role>: <content>\n"
// line per message. Stable across platforms by construction.
std::string render_request(const ChatRequest& req);

enum class ErrorKind { None, Timeout, RateLimited, Protocol, AuthMissing };

std::string to_string(ErrorKind k);

struct Completion {
  bool ok = false;
  std::string text;
  ErrorKind kind = ErrorKind::None;
  std::string error;
  int attempts = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual Completion complete(const ChatRequest& req) = 0;
  virtual int max_concurrency() const = 0;
};

// Returns completion text or throws BackendError; for call sites that have
// no use for partial results.
std::string complete_text(Backend& b, const ChatRequest& req);

// Runs requests through a bounded worker pool (at most max_concurrency in
// flight) and returns results in request order. Per-request failures are
// embedded in the result vector, never thrown.
std::vector<Completion> complete_batch(Backend& b,
                                       const std::vector<ChatRequest>& requests);

// ---------------------------------------------------------------------------
// HTTP backend

// POSTs {endpoint_url}/v1/chat/completions with JSON body fields model,
// messages, temperature, seed, max_tokens; reads the assistant text from
// choices[0].message.content. Transient failures (HTTP 429/5xx, timeouts)
// are retried up to max_retries with exponential backoff (base
// backoff_base_ms, doubling per attempt) and full jitter. The API key is
// sent as "Authorization: Bearer <value of the named env var>"; an unset
// env var with a non-local endpoint fails immediately with AuthMissing.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(model::BackendConfig config);
  Completion complete(const ChatRequest& req) override;
  int max_concurrency() const override { return config_.max_concurrency; }

 private:
  model::BackendConfig config_;
};

// ---------------------------------------------------------------------------
// Mock backend

// Deterministic offline stand-in. A request whose last user message begins
// "echo:" returns the remainder verbatim. Every other request is looked up
// in a scenario table keyed by SHA-256 of render_request(req); a miss
// returns the fallback response when one is set, otherwise a Protocol
// error. Instrumented so tests can assert the bounded-parallelism contract.
class MockBackend : public Backend {
 public:
  MockBackend() = default;

  // Loads a line-delimited file of {"prompt_sha256":..., "response":...}.
  void load_scenarios(const std::filesystem::path& path);

  void add_scenario(const std::string& prompt_sha256, const std::string& response);
  void set_fallback(std::string response) { fallback_ = std::move(response); }
  void set_max_concurrency(int n) { max_concurrency_ = n; }
  // Artificial per-call latency so concurrency tests reliably overlap.
  void set_delay_ms(int ms) { delay_ms_ = ms; }

  static std::string key_for(const ChatRequest& req);

  Completion complete(const ChatRequest& req) override;
  int max_concurrency() const override { return max_concurrency_; }

  int peak_in_flight() const { return peak_in_flight_.load(); }
  int calls() const { return calls_.load(); }

 private:
  std::map<std::string, std::string> table_;
  std::optional<std::string> fallback_;
  int max_concurrency_ = 4;
  int delay_ms_ = 0;
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_in_flight_{0};
  std::atomic<int> calls_{0};
};

// Writes a mock scenario table in the format from_scenario_file reads.
void write_scenario_file(const std::filesystem::path& path,
                         const std::vector<std::pair<std::string, std::string>>&
                             sha_response_pairs);

}  // namespace silverforge::backend
