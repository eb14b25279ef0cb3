#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "delib/annotate/cache.hpp"
#include "delib/annotate/rubric.hpp"
#include "delib/annotate/transport.hpp"
#include "delib/transcript.hpp"
#include "json.hpp"

namespace delib::annotate {

using Sleeper = std::function<void(std::chrono::milliseconds)>;
void real_sleep(std::chrono::milliseconds d);

struct RetryPolicy {
  std::size_t max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};

  /// Wait before retry number `retry` (1-based): initial * multiplier^(retry-1), capped.
  std::chrono::milliseconds delay(std::size_t retry) const;
};

/// Spaces request starts at least 60/rpm seconds apart across all threads.
class RateLimiter {
 public:
  RateLimiter(double requests_per_minute, Sleeper sleeper);
  void acquire();

 private:
  std::chrono::nanoseconds interval_{0};
  Sleeper sleeper_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point next_{};
};

struct ClientConfig {
  RetryPolicy retry;
  double requests_per_minute = 0.0;  // 0: unlimited
  PromptOptions prompt;
  std::size_t concurrency = 4;
};

enum class ResultStatus { Ok, Unparseable };

struct AnnotationResult {
  std::string statement_id;
  Dimension dimension = Dimension::Novelty;
  ResultStatus status = ResultStatus::Ok;
  std::optional<int> label;
  std::string rationale;
  std::string raw;
  std::string problem;  // set when unparseable
  std::string model;
  double latency_ms = 0.0;
  std::size_t attempts = 0;  // transport calls made; 0 on a cache hit
  bool from_cache = false;
};

struct RetryEvent {
  std::string key;
  std::size_t attempt = 0;
  std::chrono::milliseconds delay{0};
  std::string message;
};

/// One annotation call: prompt, cache, rate limit, retries, parse.
class Annotator {
 public:
  Annotator(Transport& transport, AnnotationCache& cache, ClientConfig config = {},
            Sleeper sleeper = real_sleep);

  /// Throws Error(MissingFewShots), Error(TransportExhausted) or Error(CacheWrite).
  /// An unparseable reply is a result, not an error.
  AnnotationResult annotate(const AnnotationRequest& request);
  AnnotationResult complete_prompt(const std::string& prompt, const Rubric& rubric, const Statement& statement);

  const ClientConfig& config() const noexcept { return config_; }
  std::size_t transport_calls() const noexcept { return transport_calls_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }
  std::vector<RetryEvent> retry_log() const;

 private:
  Transport& transport_;
  AnnotationCache& cache_;
  ClientConfig config_;
  Sleeper sleeper_;
  RateLimiter limiter_;
  std::atomic<std::size_t> transport_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  mutable std::mutex log_mutex_;
  std::vector<RetryEvent> retry_log_;
};

struct RubricSet {
  std::shared_ptr<const Rubric> novelty;
  std::shared_ptr<const Rubric> justification;
  std::shared_ptr<const Rubric> stance;

  const std::shared_ptr<const Rubric>& get(Dimension d) const;
};

struct AnnotationFailure {
  std::string statement_id;
  Dimension dimension = Dimension::Novelty;
  std::string code;
  std::string message;
  std::string raw;
};

struct CorpusResult {
  std::vector<StatementAnnotation> annotations;  // statements with all three labels, in (room, agenda, seq) order
  std::vector<AnnotationResult> results;         // by (statement order, dimension)
  std::vector<AnnotationFailure> failures;
  std::size_t transport_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t retries = 0;
};

/// Annotates every statement on all three dimensions. Identical prompts are
/// sent once. Per-call failures go to the manifest; a cache write failure aborts.
CorpusResult annotate_corpus(const std::vector<Statement>& statements, const RubricSet& rubrics,
                             Annotator& annotator, std::size_t concurrency);

/// Run-independent summary (no call or cache counters) and the failure manifest.
nlohmann::ordered_json to_json(const CorpusResult& result);

}  // namespace delib::annotate
