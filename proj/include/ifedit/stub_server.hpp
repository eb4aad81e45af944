#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "ifedit/backends.hpp"

namespace ifedit {

// Loopback HTTP server speaking the /v1/predict and /v1/chat/completions
// protocols. Used by tests and by the ifedit-stub tool.
class StubServer {
 public:
  struct Options {
    std::shared_ptr<const DenoiserBackend> backend;  // /v1/predict is 404 when null
    std::string chat_content;                        // assistant message text; /v1/chat/completions is 404 when empty
    std::string model = "stub-vlm";
    int response_delay_ms = 0;
    // Replaces the predict reply body when set (malformed-reply tests).
    std::function<std::string(const std::string& request_body)> predict_override;
  };

  explicit StubServer(Options options, const std::string& host = "127.0.0.1", int port = 0);
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  int port() const noexcept { return port_; }
  std::string url() const;
  std::size_t predict_calls() const noexcept { return predict_calls_; }
  std::size_t chat_calls() const noexcept { return chat_calls_; }

  // Blocks until stop() is called from another thread.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Options options_;
  std::string host_;
  int port_ = 0;
  std::atomic<std::size_t> predict_calls_{0};
  std::atomic<std::size_t> chat_calls_{0};
  std::thread thread_;
};

}  // namespace ifedit
