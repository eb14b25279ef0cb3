#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "delib/annotate/transport.hpp"

#include <cstdlib>
#include <regex>

#include "delib/rng.hpp"
#include "httplib.h"
#include "json.hpp"

namespace delib::annotate {

MockTransport::MockTransport() : responder_(&MockTransport::hashed_rating) {}
MockTransport::MockTransport(Responder responder) : responder_(std::move(responder)) {}

std::string MockTransport::hashed_rating(const ChatRequest& request) {
  static const std::regex range_re(R"(RATING: <integer from (-?\d+) to (-?\d+)>)");
  std::smatch m;
  int lo = 0, hi = 0;
  if (std::regex_search(request.prompt, m, range_re)) {
    lo = std::stoi(m[1].str());
    hi = std::stoi(m[2].str());
  }
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  const auto label = lo + static_cast<int>(rng::hash_string(request.model + request.prompt) % span);
  return "RATING: " + std::to_string(label) + "\nRATIONALE: mock rating";
}

std::string MockTransport::complete(const ChatRequest& request) {
  ++calls_;
  {
    std::lock_guard lock(mutex_);
    if (permanent_) {
      ++failures_;
      throw TransportFailure("mock permanent failure", false);
    }
    if (pending_failures_ > 0) {
      --pending_failures_;
      ++failures_;
      throw TransportFailure("mock transient failure", true);
    }
  }
  return responder_(request);
}

void MockTransport::inject_failures(std::size_t count) {
  std::lock_guard lock(mutex_);
  pending_failures_ += count;
}

void MockTransport::set_permanent_failure(bool on) {
  std::lock_guard lock(mutex_);
  permanent_ = on;
}

HttpTransport::HttpTransport(HttpConfig config) : config_(std::move(config)) {
  if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

std::string HttpTransport::complete(const ChatRequest& request) {
  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const nlohmann::json body = {
      {"model", request.model},
      {"temperature", request.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})}};
  const auto res = client.Post(config_.path, headers, body.dump(), "application/json");
  if (!res) throw TransportFailure("HTTP error: " + httplib::to_string(res.error()), true);
  if (res->status == 429 || res->status >= 500) {
    throw TransportFailure("HTTP status " + std::to_string(res->status), true);
  }
  if (res->status != 200) {
    throw TransportFailure("HTTP status " + std::to_string(res->status) + ": " + res->body.substr(0, 200), false);
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportFailure(std::string("malformed completion response: ") + e.what(), false);
  }
}

}  // namespace delib::annotate
