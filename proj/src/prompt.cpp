#include "ifedit/prompt.hpp"

#include <cstdlib>
#include <cstring>
#include <json.hpp>

#include "ifedit/encoding.hpp"
#include "ifedit/error.hpp"
#include "ifedit/image_io.hpp"
#include "ifedit/log.hpp"

namespace ifedit {
namespace {

constexpr std::string_view kSystemPrompt =
    "You rewrite image-editing instructions for an image-to-video model.\n"
    "You receive one image and a short, static editing instruction. Think about the edit as something "
    "that happens over a few seconds of video: which elements move, appear, disappear or change, in what "
    "order, and how fast. Everything the instruction does not mention keeps its identity, position, "
    "colour and lighting, and the camera stays fixed.\n"
    "Answer in exactly two sections:\n"
    "REASONING: step-by-step description of the visual process, from the first frame to the last.\n"
    "PROMPT: one paragraph in present tense describing the scene evolving over time and ending in the "
    "edited state. Do not mention frames, videos or editing.\n";

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? v : nullptr;
}

}  // namespace

std::string_view to_string(PromptSource source) noexcept {
  switch (source) {
    case PromptSource::Remote: return "remote";
    case PromptSource::Fallback: return "fallback";
    case PromptSource::Bypass: return "bypass";
  }
  return "unknown";
}

std::string_view default_system_prompt() noexcept { return kSystemPrompt; }

std::optional<VlmEndpoint> vlm_endpoint_from_env() {
  const char* url = env("IFEDIT_VLM_URL");
  if (url == nullptr) return std::nullopt;
  VlmEndpoint endpoint;
  endpoint.http.base_url = url;
  if (const char* key = env("IFEDIT_VLM_KEY")) endpoint.http.bearer_token = key;
  if (const char* ms = env("IFEDIT_VLM_TIMEOUT_MS")) endpoint.http.timeout_ms = std::atoi(ms);
  endpoint.model = env("IFEDIT_VLM_MODEL") != nullptr ? env("IFEDIT_VLM_MODEL") : "qwen3-vl";
  return endpoint;
}

EnhancedPrompt fallback_prompt(std::string_view instruction) {
  if (instruction.empty()) throw ArgumentError("instruction must be non-empty");
  EnhancedPrompt p;
  p.original = std::string(instruction);
  p.reasoning = std::string(kFallbackReasoning);
  p.temporal_prompt = "The scene evolves continuously over time: " + p.original +
                      " The camera and unrelated scene elements remain unchanged throughout.";
  p.source = PromptSource::Fallback;
  return p;
}

EnhancedPrompt bypass_prompt(std::string_view instruction) {
  if (instruction.empty()) throw ArgumentError("instruction must be non-empty");
  return EnhancedPrompt{std::string(instruction), "", std::string(instruction), PromptSource::Bypass};
}

std::pair<std::string, std::string> parse_vlm_reply(std::string_view content) {
  constexpr std::string_view kReasoning = "REASONING:";
  constexpr std::string_view kPrompt = "PROMPT:";
  const auto r = content.find(kReasoning);
  const auto p = content.rfind(kPrompt);
  if (r == std::string_view::npos || p == std::string_view::npos || p < r + kReasoning.size()) {
    throw ProtocolError("VLM reply lacks REASONING:/PROMPT: sections");
  }
  std::string reasoning = trim(content.substr(r + kReasoning.size(), p - r - kReasoning.size()));
  std::string prompt = trim(content.substr(p + kPrompt.size()));
  if (prompt.empty()) throw ProtocolError("VLM reply has an empty PROMPT section");
  return {std::move(reasoning), std::move(prompt)};
}

std::string build_vlm_request(const VlmEndpoint& endpoint, const Image& image, std::string_view instruction) {
  using nlohmann::json;
  const std::string system = endpoint.system_prompt.empty() ? std::string(kSystemPrompt) : endpoint.system_prompt;
  json body = {
      {"model", endpoint.model},
      {"temperature", 0},
      {"messages",
       json::array({
           {{"role", "system"}, {"content", system}},
           {{"role", "user"},
            {"content", json::array({
                            {{"type", "image_url"},
                             {"image_url", {{"url", "data:image/png;base64," + base64_encode(encode_png(image))}}}},
                            {{"type", "text"}, {"text", "Instruction: " + std::string(instruction)}},
                        })}},
       })},
  };
  return body.dump();
}

EnhancedPrompt enhance(const Image& image, std::string_view instruction, const std::optional<VlmEndpoint>& endpoint) {
  if (instruction.empty()) throw ArgumentError("instruction must be non-empty");
  if (!endpoint) return fallback_prompt(instruction);
  try {
    const std::string reply = post_json(endpoint->http, "/v1/chat/completions", build_vlm_request(*endpoint, image, instruction));
    const auto doc = nlohmann::json::parse(reply);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    auto [reasoning, prompt] = parse_vlm_reply(content.get<std::string>());
    return EnhancedPrompt{std::string(instruction), std::move(reasoning), std::move(prompt), PromptSource::Remote};
  } catch (const std::exception& e) {
    log_warning(std::string("prompt enhancement fell back to template: ") + e.what());
    return fallback_prompt(instruction);
  }
}

PromptEmbedding embed(std::string_view text) {
  if (text.empty()) throw ArgumentError("cannot embed empty text");
  PromptEmbedding out{};
  constexpr std::size_t kPerBlock = 8;  // 32-byte digest -> 8 u32 coordinates
  for (std::size_t block = 0; block < kEmbeddingDim / kPerBlock; ++block) {
    std::string message = "ifedit-embed-v1:";
    message.push_back(static_cast<char>(block));
    message.append(text);
    const auto digest = sha256(message);
    for (std::size_t i = 0; i < kPerBlock; ++i) {
      std::uint32_t word = 0;
      for (std::size_t b = 0; b < 4; ++b) word |= static_cast<std::uint32_t>(digest[4 * i + b]) << (8 * b);
      // 24 bits keep the value exact in float, so 1.0 is never reached.
      out[block * kPerBlock + i] = static_cast<float>(static_cast<double>(word >> 8) / 8388608.0 - 1.0);
    }
  }
  return out;
}

}  // namespace ifedit
