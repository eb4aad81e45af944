#include "ifedit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ifedit/error.hpp"

namespace ifedit {

std::string to_string(const LatentDims& d) {
  return "(" + std::to_string(d.channels) + "," + std::to_string(d.frames) + "," +
         std::to_string(d.height) + "," + std::to_string(d.width) + ")";
}

VideoLatent::VideoLatent(LatentDims dims, std::vector<float> data) : dims_(dims), data_(std::move(data)) {
  if (dims_.channels == 0 || dims_.frames == 0 || dims_.height == 0 || dims_.width == 0) {
    throw ShapeError("latent dims must all be >= 1, got " + to_string(dims_));
  }
  if (data_.size() != dims_.size()) {
    throw ShapeError("latent payload has " + std::to_string(data_.size()) + " values, dims " +
                     to_string(dims_) + " need " + std::to_string(dims_.size()));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw DomainError("latent value at flat index " + std::to_string(i) + " is not finite");
    }
  }
}

VideoLatent VideoLatent::zeros(LatentDims dims) {
  return VideoLatent(dims, std::vector<float>(dims.size(), 0.0f));
}

bool VideoLatent::operator==(const VideoLatent& other) const {
  // Bitwise, so that -0.0f and 0.0f are distinguished like a byte dump would.
  return dims_ == other.dims_ &&
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

TemporalMask::TemporalMask(std::size_t frames, std::size_t height, std::size_t width,
                           std::vector<float> values)
    : frames_(frames), height_(height), width_(width), values_(std::move(values)) {
  if (frames_ == 0 || height_ == 0 || width_ == 0) throw ShapeError("mask dims must all be >= 1");
  const std::size_t plane = height_ * width_;
  if (values_.size() != frames_ * plane) throw ShapeError("mask payload size does not match dims");
  for (std::size_t f = 0; f < frames_; ++f) {
    const float v = values_[f * plane];
    if (v != 0.0f && v != 1.0f) throw DomainError("mask values must be 0 or 1");
    if (!std::all_of(values_.begin() + f * plane, values_.begin() + (f + 1) * plane,
                     [v](float x) { return x == v; })) {
      throw DomainError("mask slice " + std::to_string(f) + " is not constant");
    }
  }
}

TemporalMask TemporalMask::first_observed(std::size_t frames, std::size_t height, std::size_t width) {
  std::vector<float> values(frames * height * width, 0.0f);
  std::fill_n(values.begin(), height * width, 1.0f);
  return TemporalMask(frames, height, width, std::move(values));
}

Image::Image(std::size_t height, std::size_t width, std::vector<float> rgb)
    : height_(height), width_(width), rgb_(std::move(rgb)) {
  if (height_ == 0 || width_ == 0) throw ArgumentError("image must be non-empty");
  if (rgb_.size() != height_ * width_ * 3) throw ShapeError("image payload size does not match H x W x 3");
}

Image Image::filled(std::size_t height, std::size_t width, float value) {
  return Image(height, width, std::vector<float>(height * width * 3, value));
}

void Image::require_unit_range() const {
  for (std::size_t i = 0; i < rgb_.size(); ++i) {
    if (!(rgb_[i] >= 0.0f && rgb_[i] <= 1.0f)) {
      throw ArgumentError("pixel value " + std::to_string(rgb_[i]) + " at flat index " + std::to_string(i) +
                          " outside [0,1]");
    }
  }
}

Image Image::clamped() const {
  std::vector<float> out(rgb_.size());
  std::transform(rgb_.begin(), rgb_.end(), out.begin(), [](float v) { return std::clamp(v, 0.0f, 1.0f); });
  return Image(height_, width_, std::move(out));
}

PixelVideo::PixelVideo(std::vector<Image> frames) : frames_(std::move(frames)) {
  if (frames_.empty()) throw ArgumentError("video needs at least one frame");
  for (const auto& f : frames_) {
    if (f.height() != frames_.front().height() || f.width() != frames_.front().width()) {
      throw ShapeError("all frames of a video must share one resolution");
    }
  }
}

namespace {

void require_same_grid(const LatentDims& a, const LatentDims& b, std::string_view what) {
  if (a.frames != b.frames) {
    throw ShapeError(std::string(what) + ": temporal axis mismatch (" + std::to_string(a.frames) + " vs " +
                     std::to_string(b.frames) + ")");
  }
  if (a.height != b.height) {
    throw ShapeError(std::string(what) + ": height axis mismatch (" + std::to_string(a.height) + " vs " +
                     std::to_string(b.height) + ")");
  }
  if (a.width != b.width) {
    throw ShapeError(std::string(what) + ": width axis mismatch (" + std::to_string(a.width) + " vs " +
                     std::to_string(b.width) + ")");
  }
}

void require_valid_indices(std::span<const std::size_t> indices, std::size_t frames) {
  if (indices.empty()) throw ArgumentError("temporal_select needs at least one index");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= frames) {
      throw IndexError("temporal index " + std::to_string(indices[i]) + " out of range for " +
                       std::to_string(frames) + " frames");
    }
    if (i > 0 && indices[i] <= indices[i - 1]) {
      throw ArgumentError("temporal indices must be strictly increasing");
    }
  }
}

}  // namespace

VideoLatent concat_channels(const VideoLatent& z, const VideoLatent& y, const TemporalMask& m) {
  require_same_grid(z.dims(), y.dims(), "concat_channels(z, y)");
  require_same_grid(z.dims(), LatentDims{1, m.frames(), m.height(), m.width()}, "concat_channels(z, m)");

  LatentDims out = z.dims();
  out.channels = z.channels() + y.channels() + 1;
  std::vector<float> data;
  data.reserve(out.size());
  data.insert(data.end(), z.data().begin(), z.data().end());
  data.insert(data.end(), y.data().begin(), y.data().end());
  data.insert(data.end(), m.values().begin(), m.values().end());
  return VideoLatent(out, std::move(data));
}

VideoLatent channel_block(const VideoLatent& x, std::size_t first, std::size_t count) {
  if (count == 0 || first + count > x.channels()) {
    throw IndexError("channel block [" + std::to_string(first) + ", " + std::to_string(first + count) +
                     ") out of range for " + std::to_string(x.channels()) + " channels");
  }
  const std::size_t per_channel = x.frames() * x.dims().sites();
  auto begin = x.data().begin() + static_cast<std::ptrdiff_t>(first * per_channel);
  LatentDims out = x.dims();
  out.channels = count;
  return VideoLatent(out, std::vector<float>(begin, begin + static_cast<std::ptrdiff_t>(count * per_channel)));
}

VideoLatent temporal_select(const VideoLatent& x, std::span<const std::size_t> indices) {
  require_valid_indices(indices, x.frames());
  LatentDims out = x.dims();
  out.frames = indices.size();
  const std::size_t plane = x.dims().sites();
  std::vector<float> data;
  data.reserve(out.size());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (std::size_t f : indices) {
      auto src = x.data().subspan(x.offset(c, f, 0, 0), plane);
      data.insert(data.end(), src.begin(), src.end());
    }
  }
  return VideoLatent(out, std::move(data));
}

TemporalMask temporal_select(const TemporalMask& m, std::span<const std::size_t> indices) {
  require_valid_indices(indices, m.frames());
  const std::size_t plane = m.height() * m.width();
  std::vector<float> values;
  values.reserve(indices.size() * plane);
  for (std::size_t f : indices) {
    auto src = m.values().subspan(f * plane, plane);
    values.insert(values.end(), src.begin(), src.end());
  }
  return TemporalMask(indices.size(), m.height(), m.width(), std::move(values));
}

}  // namespace ifedit
