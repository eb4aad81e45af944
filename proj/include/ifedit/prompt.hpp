#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "ifedit/http.hpp"
#include "ifedit/tensor.hpp"

namespace ifedit {

inline constexpr std::size_t kEmbeddingDim = 64;
using PromptEmbedding = std::array<float, kEmbeddingDim>;

// Bypass marks the raw instruction passed straight through (enhancement off).
enum class PromptSource { Remote, Fallback, Bypass };
std::string_view to_string(PromptSource source) noexcept;

struct EnhancedPrompt {
  std::string original;
  std::string reasoning;
  std::string temporal_prompt;
  PromptSource source = PromptSource::Fallback;
};

struct VlmEndpoint {
  HttpEndpoint http;
  std::string model;
  std::string system_prompt;  // empty selects default_system_prompt()
};

// Built-in system prompt asking the VLM to narrate the edit as a continuous
// temporal process and answer with REASONING:/PROMPT: sections.
std::string_view default_system_prompt() noexcept;

inline constexpr std::string_view kFallbackReasoning = "[offline fallback: no visual reasoning trace]";

// Reads IFEDIT_VLM_URL, IFEDIT_VLM_MODEL, IFEDIT_VLM_KEY, IFEDIT_VLM_TIMEOUT_MS.
// Empty when IFEDIT_VLM_URL is unset.
std::optional<VlmEndpoint> vlm_endpoint_from_env();

EnhancedPrompt fallback_prompt(std::string_view instruction);
EnhancedPrompt bypass_prompt(std::string_view instruction);

// Splits a "REASONING: ... PROMPT: ..." reply; ProtocolError when either
// part is missing or the prompt is empty.
std::pair<std::string, std::string> parse_vlm_reply(std::string_view content);

// Chat-completions request body (system prompt, image data URL, instruction).
std::string build_vlm_request(const VlmEndpoint& endpoint, const Image& image, std::string_view instruction);

// Never fails for a non-empty instruction: any remote failure degrades to
// the fallback template and logs a warning.
EnhancedPrompt enhance(const Image& image, std::string_view instruction, const std::optional<VlmEndpoint>& endpoint);

// Stable 64-d text embedding with coordinates in [-1, 1).
PromptEmbedding embed(std::string_view text);

}  // namespace ifedit
