#include "ifedit/http.hpp"

#include <httplib.h>

#include <chrono>
#include <thread>

#include "ifedit/error.hpp"
#include "ifedit/log.hpp"

namespace ifedit {

std::string post_json(const HttpEndpoint& endpoint, std::string_view path, const std::string& body) {
  if (endpoint.base_url.empty()) throw ArgumentError("HTTP endpoint has no base URL");

  httplib::Client client(endpoint.base_url);
  const auto timeout = std::chrono::milliseconds(endpoint.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  if (!endpoint.bearer_token.empty()) client.set_bearer_token_auth(endpoint.bearer_token);

  const std::string target(path);
  double backoff_ms = endpoint.retry.initial_backoff_ms;
  std::string last_failure;
  for (int attempt = 0; attempt <= endpoint.retry.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(backoff_ms));
      backoff_ms *= endpoint.retry.backoff_multiplier;
    }
    auto res = client.Post(target, body, "application/json");
    if (!res) {
      last_failure = httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
    } else if (res->status < 200 || res->status >= 300) {
      throw ProtocolError("POST " + endpoint.base_url + target + " returned HTTP " + std::to_string(res->status));
    } else {
      return res->body;
    }
    log_warning("POST " + endpoint.base_url + target + " attempt " + std::to_string(attempt + 1) +
                " failed: " + last_failure);
  }
  throw TransportError("POST " + endpoint.base_url + target + " failed after " +
                       std::to_string(endpoint.retry.max_retries + 1) + " attempts: " + last_failure);
}

}  // namespace ifedit
