#include "ifedit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "ifedit/error.hpp"

namespace ifedit {

std::string encode_png(const Image& image) {
  std::vector<png_byte> pixels(image.pixels().size());
  std::transform(image.pixels().begin(), image.pixels().end(), pixels.begin(), [](float v) {
    return static_cast<png_byte>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  });

  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + png.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

Image decode_png(std::string_view bytes) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw IoError(std::string("PNG decode failed: ") + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&png);
    throw IoError(std::string("PNG decode failed: ") + png.message);
  }
  std::vector<float> rgb(pixels.size());
  std::transform(pixels.begin(), pixels.end(), rgb.begin(), [](png_byte b) { return static_cast<float>(b) / 255.0f; });
  return Image(png.height, png.width, std::move(rgb));
}

void write_png(const std::filesystem::path& path, const Image& image) {
  const std::string bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

Image tile_frames(std::span<const Image> frames, std::size_t columns) {
  if (frames.empty()) throw ArgumentError("nothing to tile");
  columns = std::clamp<std::size_t>(columns, 1, frames.size());
  const std::size_t rows = (frames.size() + columns - 1) / columns;
  const std::size_t fh = frames.front().height();
  const std::size_t fw = frames.front().width();
  const std::size_t width = columns * fw;
  std::vector<float> rgb(rows * fh * width * 3, 0.0f);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::size_t r0 = (i / columns) * fh;
    const std::size_t c0 = (i % columns) * fw;
    for (std::size_t h = 0; h < fh; ++h) {
      auto src = frames[i].pixels().subspan(h * fw * 3, fw * 3);
      std::copy(src.begin(), src.end(), rgb.begin() + static_cast<std::ptrdiff_t>(((r0 + h) * width + c0) * 3));
    }
  }
  return Image(rows * fh, width, std::move(rgb));
}

}  // namespace ifedit
