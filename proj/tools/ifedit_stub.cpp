// Loopback model server for the remote backend and VLM protocols, backed by
// the in-process analytic denoiser.

#include <CLI11.hpp>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ifedit/error.hpp"
#include "ifedit/pipeline.hpp"
#include "ifedit/stub_server.hpp"

namespace {
ifedit::StubServer* g_server = nullptr;
void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ifedit stub model server"};
  std::string host = "127.0.0.1";
  int port = 0;
  std::string backend = "analytic";
  double tau = 0.5;
  double lambda = 0.25;
  bool identity_motion = false;
  std::uint64_t seed = ifedit::EditConfig{}.seed;
  std::string chat_fixture;
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "port (0 picks a free one)");
  app.add_option("--backend", backend, "analytic | coupled")->check(CLI::IsMember({"analytic", "coupled"}));
  app.add_option("--tau", tau, "analytic prior standard deviation");
  app.add_option("--lambda", lambda, "coupling strength");
  app.add_flag("--identity-motion", identity_motion, "static target clip");
  app.add_option("--seed", seed, "motion program seed (match the client's --seed)");
  app.add_option("--chat-fixture", chat_fixture, "text file served as the chat-completions reply");
  CLI11_PARSE(app, argc, argv);

  try {
    ifedit::BackendConfig cfg;
    cfg.kind = ifedit::backend_kind_from_string(backend);
    cfg.tau = tau;
    cfg.lambda = lambda;
    cfg.identity_motion = identity_motion;
    ifedit::StubServer::Options options;
    options.backend = ifedit::make_backend(cfg, ifedit::CodecSpec{}, seed);
    if (!chat_fixture.empty()) {
      std::ifstream in(chat_fixture);
      if (!in) throw ifedit::IoError("cannot read " + chat_fixture);
      std::ostringstream text;
      text << in.rdbuf();
      options.chat_content = text.str();
    }
    ifedit::StubServer server(std::move(options), host, port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << server.url() << std::endl;
    server.wait();
  } catch (const ifedit::Error& e) {
    std::cerr << "ifedit-stub: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
