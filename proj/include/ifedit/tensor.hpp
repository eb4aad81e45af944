#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ifedit {

// Dimensions of a video latent, always ordered (channels, frames, height, width).
struct LatentDims {
  std::size_t channels = 1;
  std::size_t frames = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t sites() const noexcept { return height * width; }
  std::size_t size() const noexcept { return channels * frames * height * width; }
  bool operator==(const LatentDims&) const = default;
};

std::string to_string(const LatentDims& d);

// 4-D float32 tensor, row-major (C, F, H, W). Immutable after construction;
// every value is finite.
class VideoLatent {
 public:
  VideoLatent(LatentDims dims, std::vector<float> data);
  static VideoLatent zeros(LatentDims dims);

  const LatentDims& dims() const noexcept { return dims_; }
  std::size_t channels() const noexcept { return dims_.channels; }
  std::size_t frames() const noexcept { return dims_.frames; }
  std::size_t height() const noexcept { return dims_.height; }
  std::size_t width() const noexcept { return dims_.width; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const float> data() const noexcept { return data_; }
  float at(std::size_t c, std::size_t f, std::size_t h, std::size_t w) const noexcept {
    return data_[offset(c, f, h, w)];
  }
  std::size_t offset(std::size_t c, std::size_t f, std::size_t h, std::size_t w) const noexcept {
    return ((c * dims_.frames + f) * dims_.height + h) * dims_.width + w;
  }

  // Moves the payload out, leaving this tensor empty.
  std::vector<float> release() && { return std::move(data_); }

  bool operator==(const VideoLatent& other) const;

 private:
  LatentDims dims_;
  std::vector<float> data_;
};

// Binary observation mask at latent temporal resolution, dims (F, H, W).
// Each temporal slice is constant.
class TemporalMask {
 public:
  TemporalMask(std::size_t frames, std::size_t height, std::size_t width, std::vector<float> values);

  // Slice 0 observed (ones), every later slice unobserved (zeros).
  static TemporalMask first_observed(std::size_t frames, std::size_t height, std::size_t width);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::span<const float> values() const noexcept { return values_; }
  float slice_value(std::size_t f) const noexcept { return values_[f * height_ * width_]; }

  bool operator==(const TemporalMask& other) const = default;

 private:
  std::size_t frames_;
  std::size_t height_;
  std::size_t width_;
  std::vector<float> values_;
};

// One RGB frame, values stored interleaved (h, w, rgb).
class Image {
 public:
  Image(std::size_t height, std::size_t width, std::vector<float> rgb);
  static Image filled(std::size_t height, std::size_t width, float value);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::span<const float> pixels() const noexcept { return rgb_; }
  float at(std::size_t h, std::size_t w, std::size_t ch) const noexcept {
    return rgb_[(h * width_ + w) * 3 + ch];
  }

  // Throws ArgumentError naming the first value outside [0, 1].
  void require_unit_range() const;
  Image clamped() const;

  bool operator==(const Image& other) const = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<float> rgb_;
};

// Frame sequence sharing one resolution. Decoder output is not clamped, so
// the [0, 1] range is checked only where images enter the engine.
class PixelVideo {
 public:
  explicit PixelVideo(std::vector<Image> frames);

  std::size_t size() const noexcept { return frames_.size(); }
  std::size_t height() const noexcept { return frames_.front().height(); }
  std::size_t width() const noexcept { return frames_.front().width(); }
  const Image& operator[](std::size_t i) const { return frames_[i]; }
  const std::vector<Image>& frames() const noexcept { return frames_; }

 private:
  std::vector<Image> frames_;
};

// Stacks [z | y | m] along channels; m contributes one broadcast channel.
VideoLatent concat_channels(const VideoLatent& z, const VideoLatent& y, const TemporalMask& m);

// Channels [first, first + count) of x.
VideoLatent channel_block(const VideoLatent& x, std::size_t first, std::size_t count);

// Keeps the listed temporal slices. Indices must be non-empty, strictly
// increasing and in range.
VideoLatent temporal_select(const VideoLatent& x, std::span<const std::size_t> indices);
TemporalMask temporal_select(const TemporalMask& m, std::span<const std::size_t> indices);

}  // namespace ifedit
