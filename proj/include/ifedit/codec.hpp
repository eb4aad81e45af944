#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ifedit/tensor.hpp"

namespace ifedit {

struct CodecSpec {
  std::size_t temporal_factor = 4;  // pixel frames per latent frame (q)
  std::size_t spatial_factor = 2;   // pixels per latent site along each axis (p)
  std::uint64_t basis_seed = 0x1F3D5B79u;

  std::size_t channels() const noexcept { return 3 * temporal_factor * spatial_factor * spatial_factor; }
  std::size_t latent_frames(std::size_t pixel_frames) const noexcept {
    return 1 + (pixel_frames - 1) / temporal_factor;
  }
  std::size_t pixel_frames(std::size_t latent_frames) const noexcept {
    return 1 + (latent_frames - 1) * temporal_factor;
  }
  // Throws ShapeError unless (frames - 1) % q == 0 and height, width % p == 0.
  void validate(std::size_t frames, std::size_t height, std::size_t width) const;
};

// Invertible stand-in for a 3D video VAE. Latent frame 0 holds pixel frame 0
// alone; latent frame j >= 1 holds pixel frames [1 + (j-1)q, 1 + jq). Each
// site packs its p x p x q x 3 pixel block into channels and applies a fixed
// seeded orthonormal matrix, so decode is the transpose.
class Codec {
 public:
  explicit Codec(CodecSpec spec = {});
  ~Codec();
  Codec(const Codec&);
  Codec& operator=(const Codec&);
  Codec(Codec&&) noexcept;
  Codec& operator=(Codec&&) noexcept;

  const CodecSpec& spec() const noexcept { return spec_; }

  VideoLatent encode(const PixelVideo& video) const;
  PixelVideo decode(const VideoLatent& latent) const;

  // Encodes up to q frames of one temporal group (missing slots are zero)
  // into a (C, H_lat * W_lat) channel-major block.
  std::vector<float> encode_group(std::span<const Image> group) const;
  // Decodes temporal slice `frame` of `latent` into `slots` pixel frames.
  std::vector<Image> decode_slice(const VideoLatent& latent, std::size_t frame, std::size_t slots) const;

 private:
  struct Basis;
  CodecSpec spec_;
  std::unique_ptr<Basis> basis_;
};

}  // namespace ifedit
