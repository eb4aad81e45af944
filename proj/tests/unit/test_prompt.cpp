#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <json.hpp>
#include <set>

#include "ifedit/error.hpp"
#include "ifedit/prompt.hpp"
#include "ifedit/stub_server.hpp"

using namespace ifedit;

TEST_CASE("fallback template keeps the instruction verbatim") {
  const std::string instruction = "make the sky purple, keep the boat";
  const auto p = fallback_prompt(instruction);
  CHECK(p.source == PromptSource::Fallback);
  CHECK(p.original == instruction);
  CHECK(p.reasoning == kFallbackReasoning);
  CHECK(p.temporal_prompt.find(instruction) != std::string::npos);
  CHECK(p.temporal_prompt != instruction);
  CHECK_THROWS_AS(fallback_prompt(""), ArgumentError);

  const auto b = bypass_prompt(instruction);
  CHECK(b.source == PromptSource::Bypass);
  CHECK(b.temporal_prompt == instruction);
}

TEST_CASE("embed") {
  const auto a = embed("the square moves right");
  CHECK(a == embed("the square moves right"));
  CHECK(a != embed("the square moves left"));
  for (float v : a) {
    CHECK(v >= -1.0f);
    CHECK(v < 1.0f);
  }
  CHECK_THROWS_AS(embed(""), ArgumentError);

  SUBCASE("no collisions over 10^4 distinct strings") {
    std::set<PromptEmbedding> seen;
    for (int i = 0; i < 10000; ++i) seen.insert(embed("instruction #" + std::to_string(i)));
    CHECK(seen.size() == 10000);
  }
}

TEST_CASE("parse_vlm_reply") {
  const auto [r, p] = parse_vlm_reply("REASONING: first the cup tilts.\nthen it falls\nPROMPT:  A cup slowly tips over. \n");
  CHECK(r == "first the cup tilts.\nthen it falls");
  CHECK(p == "A cup slowly tips over.");
  CHECK_THROWS_AS(parse_vlm_reply("just a prompt"), ProtocolError);
  CHECK_THROWS_AS(parse_vlm_reply("PROMPT: x REASONING: y"), ProtocolError);
  CHECK_THROWS_AS(parse_vlm_reply("REASONING: y PROMPT:   "), ProtocolError);
}

TEST_CASE("VLM request body") {
  VlmEndpoint ep{HttpEndpoint{"http://127.0.0.1:1"}, "some-vlm", ""};
  const auto doc = nlohmann::json::parse(build_vlm_request(ep, Image::filled(4, 4, 0.5f), "turn it red"));
  CHECK(doc["model"] == "some-vlm");
  CHECK(doc["messages"][0]["content"] == std::string(default_system_prompt()));
  const auto& parts = doc["messages"][1]["content"];
  CHECK(parts[0]["image_url"]["url"].get<std::string>().rfind("data:image/png;base64,", 0) == 0);
  CHECK(parts[1]["text"].get<std::string>().find("turn it red") != std::string::npos);

  ep.system_prompt = "custom";
  CHECK(nlohmann::json::parse(build_vlm_request(ep, Image::filled(2, 2, 0.f), "x"))["messages"][0]["content"] == "custom");
}

TEST_CASE("enhance against a stub VLM") {
  const Image image = Image::filled(8, 8, 0.25f);

  SUBCASE("well-formed reply is used") {
    StubServer stub({nullptr, "REASONING: the ball rolls.\nPROMPT: A ball rolls to the right.", "stub-vlm", 0, nullptr});
    VlmEndpoint ep{HttpEndpoint{stub.url(), 5000, RetryPolicy{0, 10, 2.0}}, "stub-vlm", ""};
    const auto p = enhance(image, "move the ball right", ep);
    CHECK(p.source == PromptSource::Remote);
    CHECK(p.temporal_prompt == "A ball rolls to the right.");
    CHECK(p.reasoning == "the ball rolls.");
    CHECK(stub.chat_calls() == 1);
  }

  SUBCASE("a slow VLM falls back within the timeout budget") {
    StubServer stub({nullptr, "REASONING: a\nPROMPT: b", "stub-vlm", 600, nullptr});
    VlmEndpoint ep{HttpEndpoint{stub.url(), 100, RetryPolicy{0, 10, 2.0}}, "stub-vlm", ""};
    const auto start = std::chrono::steady_clock::now();
    const auto p = enhance(image, "move the ball right", ep);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    CHECK(p.source == PromptSource::Fallback);
    CHECK(p.temporal_prompt == fallback_prompt("move the ball right").temporal_prompt);
    CHECK(elapsed < std::chrono::milliseconds(500));
  }

  SUBCASE("a malformed reply falls back") {
    StubServer stub({nullptr, "no sections here", "stub-vlm", 0, nullptr});
    VlmEndpoint ep{HttpEndpoint{stub.url(), 5000, RetryPolicy{0, 10, 2.0}}, "stub-vlm", ""};
    CHECK(enhance(image, "x", ep).source == PromptSource::Fallback);
  }

  SUBCASE("no endpoint means the template") {
    CHECK(enhance(image, "x", std::nullopt).source == PromptSource::Fallback);
  }
}

TEST_CASE("VLM endpoint from the environment") {
  ::unsetenv("IFEDIT_VLM_URL");
  CHECK_FALSE(vlm_endpoint_from_env().has_value());
  ::setenv("IFEDIT_VLM_URL", "http://vlm.local:9000", 1);
  ::setenv("IFEDIT_VLM_MODEL", "m", 1);
  ::setenv("IFEDIT_VLM_TIMEOUT_MS", "1234", 1);
  const auto ep = vlm_endpoint_from_env();
  REQUIRE(ep.has_value());
  CHECK(ep->http.base_url == "http://vlm.local:9000");
  CHECK(ep->model == "m");
  CHECK(ep->http.timeout_ms == 1234);
  ::unsetenv("IFEDIT_VLM_URL");
  ::unsetenv("IFEDIT_VLM_MODEL");
  ::unsetenv("IFEDIT_VLM_TIMEOUT_MS");
}
