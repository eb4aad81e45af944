#pragma once

// Generators shared by the unit and acceptance suites.

#include <cstdint>
#include <random>
#include <vector>

#include "ifedit/tensor.hpp"

namespace ifedit::testing {

inline VideoLatent random_latent(std::mt19937_64& rng, LatentDims dims) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> data(dims.size());
  for (auto& v : data) v = normal(rng);
  return VideoLatent(dims, std::move(data));
}

inline Image random_image(std::mt19937_64& rng, std::size_t h, std::size_t w) {
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::vector<float> rgb(h * w * 3);
  for (auto& v : rgb) v = unit(rng);
  return Image(h, w, std::move(rgb));
}

inline PixelVideo random_video(std::mt19937_64& rng, std::size_t frames, std::size_t h, std::size_t w) {
  std::vector<Image> out;
  for (std::size_t i = 0; i < frames; ++i) out.push_back(random_image(rng, h, w));
  return PixelVideo(std::move(out));
}

inline float max_abs_diff(const Image& a, const Image& b) {
  float worst = 0.0f;
  for (std::size_t i = 0; i < a.pixels().size(); ++i) {
    worst = std::max(worst, std::abs(a.pixels()[i] - b.pixels()[i]));
  }
  return worst;
}

}  // namespace ifedit::testing
