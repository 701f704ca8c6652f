#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "bpmeval/errors.hpp"

namespace bpmeval {

struct DecodingConfig {
  double temperature = 0.1;
  double top_p = 1.0;
  int max_new_tokens = 2048;
};

struct EndpointConfig {
  std::string base_url;  // e.g. "http://localhost:8000"
  std::string path = "/v1/chat/completions";
  std::string model = "default";
  std::string api_key_env = "BPMEVAL_API_KEY";  // bearer token read from env
  int timeout_seconds = 120;
  int max_attempts = 3;
  int backoff_base_ms = 250;
};

namespace detail {

inline std::string completion_text(const nlohmann::json& body) {
  if (body.contains("choices") && body["choices"].is_array() && !body["choices"].empty()) {
    const auto& choice = body["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content"))
      return choice["message"]["content"].get<std::string>();
    if (choice.contains("text")) return choice["text"].get<std::string>();
  }
  if (body.contains("content") && body["content"].is_string())
    return body["content"].get<std::string>();
  throw EndpointError(200, "response carries no completion text");
}

}  // namespace detail

/// POSTs a single-user-message chat completion request and returns the raw
/// completion text. Transient failures (transport errors, 5xx) are retried
/// with exponential backoff up to max_attempts.
inline std::string generate_completion(const EndpointConfig& endpoint, const std::string& prompt,
                                       const DecodingConfig& cfg = {}) {
  if (cfg.temperature < 0.0) throw InvalidCounts("temperature must be >= 0");
  if (!(cfg.top_p > 0.0 && cfg.top_p <= 1.0)) throw InvalidCounts("top_p must be in (0, 1]");
  if (cfg.max_new_tokens <= 0) throw InvalidCounts("max_new_tokens must be > 0");

  nlohmann::json request{{"model", endpoint.model},
                         {"messages", nlohmann::json::array({nlohmann::json{
                                          {"role", "user"}, {"content", prompt}}})},
                         {"temperature", cfg.temperature},
                         {"top_p", cfg.top_p},
                         {"max_tokens", cfg.max_new_tokens}};
  const std::string body = request.dump();

  httplib::Client client(endpoint.base_url);
  client.set_connection_timeout(endpoint.timeout_seconds, 0);
  client.set_read_timeout(endpoint.timeout_seconds, 0);

  httplib::Headers headers;
  if (!endpoint.api_key_env.empty()) {
    if (const char* key = std::getenv(endpoint.api_key_env.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Error last_error = httplib::Error::Success;
  int last_status = 0;
  std::string last_body;
  for (int attempt = 0; attempt < endpoint.max_attempts; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(endpoint.backoff_base_ms * (1L << (attempt - 1))));

    auto res = client.Post(endpoint.path, headers, body, "application/json");
    if (!res) {
      last_error = res.error();
      continue;  // transport-level failure, retry
    }
    last_status = res->status;
    last_body = res->body;
    if (res->status >= 200 && res->status < 300) {
      try {
        return detail::completion_text(nlohmann::json::parse(res->body));
      } catch (const nlohmann::json::exception& e) {
        throw EndpointError(res->status, std::string("unparseable response body: ") + e.what());
      }
    }
    if (res->status < 500) throw EndpointError(res->status, res->body);  // not transient
  }

  if (last_status >= 500) throw EndpointError(last_status, last_body);
  if (last_error == httplib::Error::ConnectionTimeout || last_error == httplib::Error::Read ||
      last_error == httplib::Error::Write)
    throw TimeoutError("endpoint timed out after " + std::to_string(endpoint.max_attempts) +
                       " attempts");
  throw NetworkError("endpoint unreachable after " + std::to_string(endpoint.max_attempts) +
                     " attempts (httplib error " + std::to_string((int)last_error) + ")");
}

}  // namespace bpmeval
