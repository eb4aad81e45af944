#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ifedit/tensor.hpp"

namespace ifedit {

// IFED tensor dump, all integers and floats little-endian:
//   "IFED" | version u32 | ndims u32 | dims u32 x ndims | payload f32 x prod(dims)
// Payload is row-major. Round trips are bit-exact.
inline constexpr std::uint32_t kIfedVersion = 1;

struct DenseTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  bool operator==(const DenseTensor& other) const;
};

std::string encode_ifed(const DenseTensor& t);
DenseTensor decode_ifed(std::string_view bytes);

void write_ifed(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor read_ifed(const std::filesystem::path& path);

DenseTensor to_dense(const VideoLatent& x);
DenseTensor to_dense(const TemporalMask& m);
VideoLatent latent_from_dense(const DenseTensor& t);
TemporalMask mask_from_dense(const DenseTensor& t);

}  // namespace ifedit
