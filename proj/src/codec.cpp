#include "ifedit/codec.hpp"

#include <Eigen/Dense>
#include <random>

#include "ifedit/error.hpp"

namespace ifedit {

struct Codec::Basis {
  Eigen::MatrixXd q;  // orthonormal, channels x channels
};

void CodecSpec::validate(std::size_t frames, std::size_t height, std::size_t width) const {
  if (temporal_factor < 1 || spatial_factor < 1) throw ShapeError("codec factors must be >= 1");
  if (frames < 1) throw ShapeError("codec needs at least one frame");
  if ((frames - 1) % temporal_factor != 0) {
    throw ShapeError("frame count " + std::to_string(frames) + " violates (F - 1) mod " +
                     std::to_string(temporal_factor) + " == 0");
  }
  if (height % spatial_factor != 0 || width % spatial_factor != 0) {
    throw ShapeError("frame size " + std::to_string(height) + "x" + std::to_string(width) +
                     " not divisible by spatial factor " + std::to_string(spatial_factor));
  }
}

Codec::Codec(CodecSpec spec) : spec_(spec), basis_(std::make_unique<Basis>()) {
  if (spec_.temporal_factor < 1 || spec_.spatial_factor < 1) throw ShapeError("codec factors must be >= 1");
  const auto n = static_cast<Eigen::Index>(spec_.channels());
  std::mt19937_64 rng(spec_.basis_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd gaussian(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) gaussian(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  basis_->q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

Codec::~Codec() = default;
Codec::Codec(const Codec& other) : spec_(other.spec_), basis_(std::make_unique<Basis>(*other.basis_)) {}
Codec& Codec::operator=(const Codec& other) {
  if (this != &other) {
    spec_ = other.spec_;
    basis_ = std::make_unique<Basis>(*other.basis_);
  }
  return *this;
}
Codec::Codec(Codec&&) noexcept = default;
Codec& Codec::operator=(Codec&&) noexcept = default;

std::vector<float> Codec::encode_group(std::span<const Image> group) const {
  const std::size_t q = spec_.temporal_factor;
  const std::size_t p = spec_.spatial_factor;
  if (group.empty() || group.size() > q) throw ShapeError("temporal group must hold 1..q frames");
  const std::size_t height = group.front().height();
  const std::size_t width = group.front().width();
  spec_.validate(1, height, width);
  const std::size_t lat_h = height / p;
  const std::size_t lat_w = width / p;
  const auto sites = static_cast<Eigen::Index>(lat_h * lat_w);
  const auto channels = static_cast<Eigen::Index>(spec_.channels());

  Eigen::MatrixXd packed = Eigen::MatrixXd::Zero(channels, sites);
  for (std::size_t slot = 0; slot < group.size(); ++slot) {
    const Image& img = group[slot];
    if (img.height() != height || img.width() != width) throw ShapeError("group frames differ in size");
    for (std::size_t hl = 0; hl < lat_h; ++hl) {
      for (std::size_t wl = 0; wl < lat_w; ++wl) {
        const auto site = static_cast<Eigen::Index>(hl * lat_w + wl);
        for (std::size_t dy = 0; dy < p; ++dy) {
          for (std::size_t dx = 0; dx < p; ++dx) {
            for (std::size_t ch = 0; ch < 3; ++ch) {
              const auto row = static_cast<Eigen::Index>(((slot * p + dy) * p + dx) * 3 + ch);
              packed(row, site) = img.at(hl * p + dy, wl * p + dx, ch);
            }
          }
        }
      }
    }
  }
  const Eigen::MatrixXd coded = basis_->q * packed;
  std::vector<float> out(static_cast<std::size_t>(channels * sites));
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (Eigen::Index s = 0; s < sites; ++s) out[static_cast<std::size_t>(c * sites + s)] = static_cast<float>(coded(c, s));
  }
  return out;
}

VideoLatent Codec::encode(const PixelVideo& video) const {
  spec_.validate(video.size(), video.height(), video.width());
  const std::size_t q = spec_.temporal_factor;
  const std::size_t p = spec_.spatial_factor;
  const LatentDims dims{spec_.channels(), spec_.latent_frames(video.size()), video.height() / p, video.width() / p};
  const std::size_t sites = dims.sites();

  std::vector<float> data(dims.size());
  const auto& frames = video.frames();
  for (std::size_t j = 0; j < dims.frames; ++j) {
    const std::span<const Image> group =
        j == 0 ? std::span<const Image>(frames).subspan(0, 1) : std::span<const Image>(frames).subspan(1 + (j - 1) * q, q);
    const std::vector<float> block = encode_group(group);
    for (std::size_t c = 0; c < dims.channels; ++c) {
      std::copy_n(block.begin() + static_cast<std::ptrdiff_t>(c * sites), sites,
                  data.begin() + static_cast<std::ptrdiff_t>((c * dims.frames + j) * sites));
    }
  }
  return VideoLatent(dims, std::move(data));
}

std::vector<Image> Codec::decode_slice(const VideoLatent& latent, std::size_t frame, std::size_t slots) const {
  const std::size_t p = spec_.spatial_factor;
  if (latent.channels() != spec_.channels()) {
    throw ShapeError("latent has " + std::to_string(latent.channels()) + " channels, codec expects " +
                     std::to_string(spec_.channels()));
  }
  if (frame >= latent.frames()) throw IndexError("latent frame " + std::to_string(frame) + " out of range");
  if (slots < 1 || slots > spec_.temporal_factor) throw ArgumentError("slot count must be in [1, q]");

  const auto channels = static_cast<Eigen::Index>(latent.channels());
  const auto sites = static_cast<Eigen::Index>(latent.dims().sites());
  Eigen::MatrixXd coded(channels, sites);
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (Eigen::Index s = 0; s < sites; ++s) {
      coded(c, s) = latent.data()[latent.offset(static_cast<std::size_t>(c), frame, 0, 0) + static_cast<std::size_t>(s)];
    }
  }
  const Eigen::MatrixXd packed = basis_->q.transpose() * coded;

  const std::size_t lat_h = latent.height();
  const std::size_t lat_w = latent.width();
  std::vector<Image> out;
  out.reserve(slots);
  for (std::size_t slot = 0; slot < slots; ++slot) {
    std::vector<float> rgb(lat_h * p * lat_w * p * 3);
    const std::size_t width = lat_w * p;
    for (std::size_t hl = 0; hl < lat_h; ++hl) {
      for (std::size_t wl = 0; wl < lat_w; ++wl) {
        const auto site = static_cast<Eigen::Index>(hl * lat_w + wl);
        for (std::size_t dy = 0; dy < p; ++dy) {
          for (std::size_t dx = 0; dx < p; ++dx) {
            for (std::size_t ch = 0; ch < 3; ++ch) {
              const auto row = static_cast<Eigen::Index>(((slot * p + dy) * p + dx) * 3 + ch);
              rgb[((hl * p + dy) * width + wl * p + dx) * 3 + ch] = static_cast<float>(packed(row, site));
            }
          }
        }
      }
    }
    out.emplace_back(lat_h * p, width, std::move(rgb));
  }
  return out;
}

PixelVideo Codec::decode(const VideoLatent& latent) const {
  std::vector<Image> frames;
  frames.reserve(spec_.pixel_frames(latent.frames()));
  for (std::size_t j = 0; j < latent.frames(); ++j) {
    auto group = decode_slice(latent, j, j == 0 ? 1 : spec_.temporal_factor);
    std::move(group.begin(), group.end(), std::back_inserter(frames));
  }
  return PixelVideo(std::move(frames));
}

}  // namespace ifedit
