#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace ifedit {

std::string base64_encode(std::string_view bytes);
// Throws ProtocolError on malformed input.
std::string base64_decode(std::string_view text);

std::array<std::uint8_t, 32> sha256(std::string_view bytes);
std::string hex(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);

}  // namespace ifedit
