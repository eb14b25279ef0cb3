#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>

namespace delib::annotate {

struct ChatRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.0;
};

/// Thrown by transports. Transient failures (network errors, 429, 5xx) are
/// retried; permanent ones are not.
class TransportFailure : public std::runtime_error {
 public:
  TransportFailure(const std::string& message, bool transient)
      : std::runtime_error(message), transient_(transient) {}
  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Returns the assistant message text. Must be safe to call concurrently.
  virtual std::string complete(const ChatRequest& request) = 0;
};

/// In-process transport for tests and offline runs.
class MockTransport : public Transport {
 public:
  using Responder = std::function<std::string(const ChatRequest&)>;

  /// Default responder: a valid rating derived from a hash of the prompt.
  MockTransport();
  explicit MockTransport(Responder responder);

  std::string complete(const ChatRequest& request) override;

  /// The next `count` calls throw a transient TransportFailure.
  void inject_failures(std::size_t count);
  /// Every call fails permanently (or stops doing so).
  void set_permanent_failure(bool on);

  std::size_t calls() const noexcept { return calls_.load(); }
  std::size_t failures() const noexcept { return failures_.load(); }

  static std::string hashed_rating(const ChatRequest& request);

 private:
  Responder responder_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> failures_{0};
  std::mutex mutex_;
  std::size_t pending_failures_ = 0;
  bool permanent_ = false;
};

struct HttpConfig {
  std::string base_url = "http://localhost:8000";  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string api_key_env = "ANNOTATE_API_KEY";
  std::chrono::seconds timeout{60};
};

/// Minimal chat-completion client: POST {model, temperature, messages} and
/// read choices[0].message.content.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(HttpConfig config);
  std::string complete(const ChatRequest& request) override;

 private:
  HttpConfig config_;
  std::string api_key_;
};

}  // namespace delib::annotate
