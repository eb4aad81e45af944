#include "ifedit/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ifedit/error.hpp"

namespace ifedit {
namespace {

constexpr std::string_view kMagic = "IFED";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    if (bytes_.size() - pos_ < 4) throw ProtocolError("IFED dump truncated at byte " + std::to_string(pos_));
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = kMagic.size();
};

}  // namespace

bool DenseTensor::operator==(const DenseTensor& other) const {
  return dims == other.dims && data.size() == other.data.size() &&
         std::memcmp(data.data(), other.data.data(), data.size() * sizeof(float)) == 0;
}

std::string encode_ifed(const DenseTensor& t) {
  std::size_t count = 1;
  for (auto d : t.dims) count *= d;
  if (t.dims.empty() || count != t.data.size()) throw ShapeError("IFED dims do not match payload size");

  std::string out;
  out.reserve(kMagic.size() + 8 + 4 * t.dims.size() + 4 * t.data.size());
  out.append(kMagic);
  put_u32(out, kIfedVersion);
  put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_u32(out, d);
  for (float v : t.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

DenseTensor decode_ifed(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) throw ProtocolError("not an IFED dump (bad magic)");
  Reader r(bytes);
  if (auto version = r.u32(); version != kIfedVersion) {
    throw ProtocolError("unsupported IFED version " + std::to_string(version));
  }
  DenseTensor t;
  const std::uint32_t ndims = r.u32();
  if (ndims == 0 || ndims > 8) throw ProtocolError("IFED ndims out of range: " + std::to_string(ndims));
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < ndims; ++i) {
    t.dims.push_back(r.u32());
    count *= t.dims.back();
  }
  if (r.remaining() != 4 * count) {
    throw ProtocolError("IFED payload is " + std::to_string(r.remaining()) + " bytes, expected " +
                        std::to_string(4 * count));
  }
  t.data.resize(count);
  for (auto& v : t.data) v = std::bit_cast<float>(r.u32());
  return t;
}

void write_ifed(const std::filesystem::path& path, const DenseTensor& t) {
  const std::string bytes = encode_ifed(t);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

DenseTensor read_ifed(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_ifed(bytes);
  } catch (const ProtocolError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

DenseTensor to_dense(const VideoLatent& x) {
  const auto& d = x.dims();
  return DenseTensor{{static_cast<std::uint32_t>(d.channels), static_cast<std::uint32_t>(d.frames),
                      static_cast<std::uint32_t>(d.height), static_cast<std::uint32_t>(d.width)},
                     std::vector<float>(x.data().begin(), x.data().end())};
}

DenseTensor to_dense(const TemporalMask& m) {
  return DenseTensor{{static_cast<std::uint32_t>(m.frames()), static_cast<std::uint32_t>(m.height()),
                      static_cast<std::uint32_t>(m.width())},
                     std::vector<float>(m.values().begin(), m.values().end())};
}

VideoLatent latent_from_dense(const DenseTensor& t) {
  if (t.dims.size() != 4) throw ShapeError("latent dump must have 4 dims, got " + std::to_string(t.dims.size()));
  return VideoLatent(LatentDims{t.dims[0], t.dims[1], t.dims[2], t.dims[3]}, t.data);
}

TemporalMask mask_from_dense(const DenseTensor& t) {
  if (t.dims.size() != 3) throw ShapeError("mask dump must have 3 dims, got " + std::to_string(t.dims.size()));
  return TemporalMask(t.dims[0], t.dims[1], t.dims[2], t.data);
}

}  // namespace ifedit
