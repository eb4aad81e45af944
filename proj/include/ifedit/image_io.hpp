#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ifedit/tensor.hpp"

namespace ifedit {

// 8-bit RGB PNG. Values are clamped to [0, 1] and rounded on write.
std::string encode_png(const Image& image);
Image decode_png(std::string_view bytes);

void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);

// Tiles frames left-to-right, top-to-bottom into `columns` columns.
Image tile_frames(std::span<const Image> frames, std::size_t columns);

}  // namespace ifedit
