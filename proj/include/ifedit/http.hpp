#pragma once

#include <string>
#include <string_view>

namespace ifedit {

struct RetryPolicy {
  int max_retries = 2;
  int initial_backoff_ms = 100;
  double backoff_multiplier = 2.0;
};

struct HttpEndpoint {
  std::string base_url;  // scheme://host[:port], no trailing path
  int timeout_ms = 30000;
  RetryPolicy retry;
  std::string bearer_token;  // sent as "Authorization: Bearer ..." when non-empty
};

// POSTs a JSON body and returns the response body of a 2xx reply.
// Connection failures, timeouts and 5xx replies are retried with exponential
// backoff, then reported as TransportError. Other statuses raise ProtocolError.
std::string post_json(const HttpEndpoint& endpoint, std::string_view path, const std::string& body);

}  // namespace ifedit
