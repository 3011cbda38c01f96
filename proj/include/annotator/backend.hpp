#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "annotator/corpus.hpp"
#include "annotator/prompt.hpp"

namespace annotator {

using Duration = std::chrono::milliseconds;

// Monotonic time source. The simulated implementation lets tests reason
// about pacing without wall-clock sleeps.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Duration now() = 0;
  virtual void sleep_until(Duration target) = 0;
  void sleep_for(Duration d) { sleep_until(now() + d); }
};

class SystemClock : public Clock {
 public:
  SystemClock() : epoch_(std::chrono::steady_clock::now()) {}
  Duration now() override;
  void sleep_until(Duration target) override;

 private:
  std::chrono::steady_clock::time_point epoch_;
};

// Virtual time: sleep_until advances the clock to the target instantly.
class SimulatedClock : public Clock {
 public:
  Duration now() override;
  void sleep_until(Duration target) override;

 private:
  std::mutex mutex_;
  Duration now_{0};
};

// Paces dispatches to at most requests_per_minute; no-op when unset.
class RateLimiter {
 public:
  RateLimiter(Clock& clock, std::optional<std::uint32_t> requests_per_minute);
  void acquire();

 private:
  Clock& clock_;
  Duration interval_{0};
  Duration next_free_{0};
  std::mutex mutex_;
};

struct BackendConfig {
  std::string api_base_url = "https://api.openai.com/v1";
  std::string model_id = "gpt-3.5-turbo-0301";
  std::string api_key_env = "ANNOTATOR_API_KEY";
  double temperature = 1.0;
  int max_output_tokens = 1024;
  Duration request_timeout{30'000};
  int patience = 3;
  int max_concurrency = 4;
  std::optional<std::uint32_t> requests_per_minute;
  Duration retry_backoff_base{2'000};  // ±50% jitter between attempts
};

void validate_backend_config(const BackendConfig& config);

struct ChatMessage {
  std::string role;  // "system" | "user"
  std::string content;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
};

struct ChatExchange {
  ChatRequest request;
  std::string response_text;
  TokenUsage usage;  // backend-reported, or estimated and flagged
  Duration latency{0};
};

struct JobContext {
  std::string id;
  std::size_t index = 0;
  int attempt = 1;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Returns the raw assistant text and token usage; performs no parsing.
  // Throws TransportError, RateLimitedError, ApiError, or AuthMissingError.
  virtual ChatExchange complete(const PromptBundle& bundle,
                                const BackendConfig& config,
                                const JobContext* context) = 0;
};

inline ChatExchange complete(ChatBackend& backend, const PromptBundle& bundle,
                             const BackendConfig& config) {
  return backend.complete(bundle, config, nullptr);
}

// POSTs to <api_base_url>/chat/completions with bearer auth taken from the
// configured environment variable.
class HttpBackend : public ChatBackend {
 public:
  ChatExchange complete(const PromptBundle& bundle, const BackendConfig& config,
                        const JobContext* context) override;
};

// ---- scripted mock backend ----

struct MockStep {
  std::optional<std::string> text;
  // "transport" | "rate_limited" | "api" (with status)
  std::optional<std::string> error;
  int status = 500;
  int delay_ms = 0;
};

struct MockScript {
  std::vector<MockStep> default_steps;
  std::map<std::string, std::vector<MockStep>> by_id;
  std::map<std::size_t, std::vector<MockStep>> by_index;
};

MockScript load_mock_script(const std::filesystem::path& path);
MockScript mock_script_always(std::string text);

class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(MockScript script, Clock* clock = nullptr);

  ChatExchange complete(const PromptBundle& bundle, const BackendConfig& config,
                        const JobContext* context) override;

  int calls_for(const std::string& id) const;
  int total_calls() const;
  int high_water_concurrency() const;

 private:
  const std::vector<MockStep>& steps_for(const JobContext* context) const;

  MockScript script_;
  Clock* clock_;
  mutable std::mutex mutex_;
  std::map<std::string, int> calls_;
  int total_calls_ = 0;
  int in_flight_ = 0;
  int high_water_ = 0;
};

// ---- retry with patience ----

struct Exclusion {
  int attempts = 0;
  std::string last_error;
};

struct CompletionOutcome {
  std::optional<ChatExchange> exchange;  // set on validated success
  std::optional<Exclusion> exclusion;
  int attempts = 0;
  TokenUsage usage;  // summed across all attempts

  bool ok() const { return exchange.has_value(); }
};

// Returns the parse-failure message, or nullopt when the raw text is valid.
using Validator = std::function<std::optional<std::string>(const std::string&)>;

// Calls the backend up to config.patience times, retrying on transport
// errors, API errors, and validation failures alike. AuthMissingError is a
// configuration problem and propagates instead of consuming patience. Total
// otherwise: failures end as an Exclusion value, never an exception.
CompletionOutcome complete_with_patience(ChatBackend& backend,
                                         const PromptBundle& bundle,
                                         const BackendConfig& config,
                                         const Validator& validate,
                                         Clock& clock,
                                         RateLimiter* limiter = nullptr,
                                         const JobContext* context = nullptr);

// ---- worker pool ----

struct PoolJob {
  std::string id;
  PromptBundle bundle;
};

struct PoolResult {
  std::string id;
  CompletionOutcome outcome;
};

// Job-aware validation: the job gives item-specific context (e.g. the gold
// text an echoed translation is checked against).
using PoolValidator = std::function<std::optional<std::string>(
    const std::string& raw, const PoolJob& job)>;

// Per-item progress hook; invoked from worker threads, serialised.
using PoolProgress = std::function<void(const PoolResult&)>;

// Runs jobs with at most config.max_concurrency in flight and at most
// requests_per_minute dispatches. Results come back sorted by job id.
// Throws PoolAbortedError when `cancel` is set; completed outcomes before
// the cancel are discarded by the throw, never corrupted.
std::vector<PoolResult> run_pool(ChatBackend& backend,
                                 const std::vector<PoolJob>& jobs,
                                 const BackendConfig& config,
                                 const PoolValidator& validate, Clock& clock,
                                 const std::atomic<bool>* cancel = nullptr,
                                 const PoolProgress& progress = nullptr);

}  // namespace annotator
