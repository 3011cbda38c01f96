#include "annotator/backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "annotator/errors.hpp"
#include "annotator/rng.hpp"
#include "annotator/text.hpp"

namespace annotator {

namespace {

Duration backoff_delay(const BackendConfig& config, const std::string& job_id,
                       int attempt) {
  const auto base = config.retry_backoff_base.count();
  if (base <= 0) return Duration{0};
  SplitMix64 rng(fnv1a64(job_id) + static_cast<std::uint64_t>(attempt));
  // base ± 50% jitter
  const auto span = static_cast<std::uint64_t>(base);  // jitter window width
  const auto offset = static_cast<std::int64_t>(rng.next() % (span + 1)) -
                      static_cast<std::int64_t>(span / 2);
  return Duration{std::max<std::int64_t>(0, base + offset)};
}

}  // namespace

Duration SystemClock::now() {
  return std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() -
                                              epoch_);
}

void SystemClock::sleep_until(Duration target) {
  const Duration current = now();
  if (target > current) {
    std::this_thread::sleep_for(target - current);
  }
}

Duration SimulatedClock::now() {
  std::lock_guard lock(mutex_);
  return now_;
}

void SimulatedClock::sleep_until(Duration target) {
  std::lock_guard lock(mutex_);
  now_ = std::max(now_, target);
}

RateLimiter::RateLimiter(Clock& clock,
                         std::optional<std::uint32_t> requests_per_minute)
    : clock_(clock) {
  if (requests_per_minute && *requests_per_minute > 0) {
    interval_ = Duration{60'000 / *requests_per_minute};
  }
}

void RateLimiter::acquire() {
  if (interval_.count() == 0) return;
  Duration slot;
  {
    std::lock_guard lock(mutex_);
    slot = std::max(clock_.now(), next_free_);
    next_free_ = slot + interval_;
  }
  clock_.sleep_until(slot);
}

void validate_backend_config(const BackendConfig& config) {
  if (config.patience < 1) throw ConfigError("patience must be at least 1");
  if (config.max_concurrency < 1) {
    throw ConfigError("max_concurrency must be at least 1");
  }
  if (config.temperature < 0.0 || config.temperature > 2.0) {
    throw ConfigError("temperature must be within [0, 2]");
  }
  if (config.max_output_tokens < 1) {
    throw ConfigError("max_output_tokens must be at least 1");
  }
  if (config.requests_per_minute && *config.requests_per_minute == 0) {
    throw ConfigError("requests_per_minute must be positive when set");
  }
}

CompletionOutcome complete_with_patience(ChatBackend& backend,
                                         const PromptBundle& bundle,
                                         const BackendConfig& config,
                                         const Validator& validate,
                                         Clock& clock, RateLimiter* limiter,
                                         const JobContext* context) {
  validate_backend_config(config);
  CompletionOutcome outcome;
  std::string last_error = "no attempt made";
  JobContext local_context;
  if (context) local_context = *context;
  const std::string job_id = context ? context->id : std::string{};

  for (int attempt = 1; attempt <= config.patience; ++attempt) {
    outcome.attempts = attempt;
    local_context.attempt = attempt;
    if (limiter) limiter->acquire();
    try {
      ChatExchange exchange =
          backend.complete(bundle, config, context ? &local_context : nullptr);
      outcome.usage.add(exchange.usage);
      const std::optional<std::string> parse_error =
          validate(exchange.response_text);
      if (!parse_error) {
        outcome.exchange = std::move(exchange);
        return outcome;
      }
      last_error = "parse: " + *parse_error;
    } catch (const AuthMissingError&) {
      throw;  // configuration problem, not a per-item failure
    } catch (const BackendError& error) {
      last_error = error.what();
    }
    if (attempt < config.patience) {
      clock.sleep_for(backoff_delay(config, job_id, attempt));
    }
  }
  outcome.exclusion = Exclusion{outcome.attempts, last_error};
  return outcome;
}

std::vector<PoolResult> run_pool(ChatBackend& backend,
                                 const std::vector<PoolJob>& jobs,
                                 const BackendConfig& config,
                                 const PoolValidator& validate, Clock& clock,
                                 const std::atomic<bool>* cancel,
                                 const PoolProgress& progress) {
  validate_backend_config(config);
  {
    std::vector<std::string> ids;
    ids.reserve(jobs.size());
    for (const PoolJob& job : jobs) ids.push_back(job.id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw ConfigError("duplicate job ids in pool");
    }
  }

  std::vector<PoolResult> results(jobs.size());
  RateLimiter limiter(clock, config.requests_per_minute);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> aborted{false};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  std::mutex progress_mutex;

  const std::size_t workers = std::min<std::size_t>(
      jobs.size(), static_cast<std::size_t>(config.max_concurrency));
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (true) {
        if ((cancel && cancel->load()) || aborted.load()) return;
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        const PoolJob& job = jobs[i];
        JobContext context{job.id, i, 1};
        const Validator job_validate = [&](const std::string& raw) {
          return validate(raw, job);
        };
        try {
          results[i] = PoolResult{
              job.id, complete_with_patience(backend, job.bundle, config,
                                             job_validate, clock, &limiter,
                                             &context)};
          if (progress) {
            std::lock_guard lock(progress_mutex);
            progress(results[i]);
          }
        } catch (...) {
          std::lock_guard lock(fatal_mutex);
          if (!fatal) fatal = std::current_exception();
          aborted.store(true);
          return;
        }
      }
    });
  }
  for (std::thread& thread : threads) thread.join();

  if (fatal) std::rethrow_exception(fatal);
  if (cancel && cancel->load()) throw PoolAbortedError();

  std::sort(results.begin(), results.end(),
            [](const PoolResult& a, const PoolResult& b) { return a.id < b.id; });
  return results;
}

}  // namespace annotator
