#include "ifedit/stub_server.hpp"

#include <httplib.h>

#include <chrono>
#include <json.hpp>

#include "ifedit/error.hpp"

namespace ifedit {

struct StubServer::Impl {
  httplib::Server server;
};

StubServer::StubServer(Options options, const std::string& host, int port)
    : impl_(std::make_unique<Impl>()), options_(std::move(options)), host_(host) {
  auto& srv = impl_->server;
  auto delay = [this] {
    if (options_.response_delay_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(options_.response_delay_ms));
    }
  };

  srv.Post("/v1/predict", [this, delay](const httplib::Request& req, httplib::Response& res) {
    ++predict_calls_;
    delay();
    if (options_.predict_override) {
      res.set_content(options_.predict_override(req.body), "application/json");
      return;
    }
    if (!options_.backend) {
      res.status = 404;
      return;
    }
    try {
      res.set_content(serve_predict(*options_.backend, req.body), "application/json");
    } catch (const Error& e) {
      res.status = e.kind() == ErrorKind::Protocol ? 400 : 422;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
    }
  });

  srv.Post("/v1/chat/completions", [this, delay](const httplib::Request&, httplib::Response& res) {
    ++chat_calls_;
    delay();
    if (options_.chat_content.empty()) {
      res.status = 404;
      return;
    }
    nlohmann::json reply = {
        {"id", "chatcmpl-stub"},
        {"object", "chat.completion"},
        {"model", options_.model},
        {"choices", nlohmann::json::array({{{"index", 0},
                                            {"message", {{"role", "assistant"}, {"content", options_.chat_content}}},
                                            {"finish_reason", "stop"}}})},
    };
    res.set_content(reply.dump(), "application/json");
  });

  if (port == 0) {
    port_ = srv.bind_to_any_port(host_);
  } else {
    port_ = srv.bind_to_port(host_, port) ? port : -1;
  }
  if (port_ <= 0) throw TransportError("stub server could not bind " + host_ + ":" + std::to_string(port));
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

StubServer::~StubServer() { stop(); }

std::string StubServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

void StubServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void StubServer::stop() {
  impl_->server.stop();
  if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
}

}  // namespace ifedit
