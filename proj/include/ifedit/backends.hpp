#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ifedit/codec.hpp"
#include "ifedit/http.hpp"
#include "ifedit/prompt.hpp"
#include "ifedit/scheduler.hpp"
#include "ifedit/tensor.hpp"

namespace ifedit {

// Arguments of one denoiser call. `frames` maps each temporal slice of z to
// its latent-frame index in the undropped clip, so backends see which
// frames survived temporal dropout.
struct DenoiserInput {
  VideoLatent z;
  VideoLatent y;
  TemporalMask m;
  double t = 1.0;
  PromptEmbedding embedding{};
  std::vector<std::size_t> frames;

  // ShapeError/ArgumentError when z, y, m, frames or t disagree.
  void validate() const;
  // [z | y | m] as the backbone would see it.
  VideoLatent packed() const { return concat_channels(z, y, m); }
};

// A denoiser predicting the clean latent x0 from a noisy one. Implementations
// are deterministic and safe to call concurrently.
class DenoiserBackend {
 public:
  virtual ~DenoiserBackend() = default;
  virtual VideoLatent predict(const DenoiserInput& input) const = 0;
  virtual std::string descriptor() const = 0;
};

// Per-frame translation applied to the conditioning image to define the
// target clip. Velocity is derived from a hash of (embedding, seed).
struct MotionProgram {
  bool identity = false;
  std::uint64_t seed = 0;
  double max_speed = 0.5;  // pixels per pixel-frame along each axis
};

struct MotionVelocity {
  double dx = 0.0;
  double dy = 0.0;
};

MotionVelocity motion_velocity(const PromptEmbedding& embedding, const MotionProgram& motion);

// Pixel displacement of pixel frame `frame` under velocity v.
std::pair<long, long> motion_offset(const MotionVelocity& v, std::size_t frame);

Image circular_shift(const Image& image, long dx, long dy);

// Target clean latent for the slices listed in input.frames: latent frame 0
// is copied from y; every other frame encodes the conditioning image moved
// along the motion program. Each slice depends only on its own frame index.
VideoLatent target_latent(const DenoiserInput& input, const Codec& codec, const MotionProgram& motion);

// Posterior mean of x0 ~ N(mu, tau^2) given z = alpha x0 + sigma eps.
VideoLatent posterior_mean(const VideoLatent& z, const VideoLatent& mu, double alpha, double sigma, double tau);

// slice_j <- (1 - lambda) slice_j + lambda mean(existing neighbours j-1, j+1).
VideoLatent temporal_blend(const VideoLatent& x, double lambda);

struct AnalyticSpec {
  double tau = 0.5;
  MotionProgram motion;
};

class AnalyticBackend : public DenoiserBackend {
 public:
  AnalyticBackend(Codec codec, AnalyticSpec spec);
  VideoLatent predict(const DenoiserInput& input) const override;
  std::string descriptor() const override;
  const AnalyticSpec& spec() const noexcept { return spec_; }

 private:
  Codec codec_;
  AnalyticSpec spec_;
};

class CoupledBackend : public DenoiserBackend {
 public:
  CoupledBackend(Codec codec, AnalyticSpec spec, double lambda);
  VideoLatent predict(const DenoiserInput& input) const override;
  std::string descriptor() const override;

 private:
  AnalyticBackend base_;
  double lambda_;
};

// POST {base_url}/v1/predict with base64 IFED tensors.
class RemoteBackend : public DenoiserBackend {
 public:
  explicit RemoteBackend(HttpEndpoint endpoint);
  VideoLatent predict(const DenoiserInput& input) const override;
  std::string descriptor() const override;

 private:
  HttpEndpoint endpoint_;
};

// Reads IFEDIT_BACKEND_URL and IFEDIT_BACKEND_TIMEOUT_MS.
std::optional<HttpEndpoint> backend_endpoint_from_env();

// Wire format shared by RemoteBackend and the stub server.
std::string encode_predict_request(const DenoiserInput& input);
DenoiserInput decode_predict_request(const std::string& body);
std::string encode_predict_response(const VideoLatent& x0);
VideoLatent decode_predict_response(const std::string& body, const LatentDims& expected);
// Server side: decode, predict, encode.
std::string serve_predict(const DenoiserBackend& backend, const std::string& body);

struct MoEPrediction {
  VideoLatent x0;
  ExpertPhase expert;
};

// Two-expert denoiser routed by expert_for(t, switch_t).
class MoEDenoiser {
 public:
  MoEDenoiser(std::shared_ptr<const DenoiserBackend> high, std::shared_ptr<const DenoiserBackend> low, double switch_t);

  MoEPrediction predict(const DenoiserInput& input) const;
  double switch_t() const noexcept { return switch_t_; }

 private:
  std::shared_ptr<const DenoiserBackend> high_;
  std::shared_ptr<const DenoiserBackend> low_;
  double switch_t_;
};

}  // namespace ifedit
