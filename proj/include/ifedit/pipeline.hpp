#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ifedit/backends.hpp"
#include "ifedit/codec.hpp"
#include "ifedit/prompt.hpp"
#include "ifedit/scpr.hpp"
#include "ifedit/tld.hpp"

namespace ifedit {

enum class BackendKind { Analytic, Coupled, Remote };
std::string_view to_string(BackendKind kind) noexcept;
BackendKind backend_kind_from_string(std::string_view name);

struct BackendConfig {
  BackendKind kind = BackendKind::Analytic;
  double tau = 0.5;
  double lambda = 0.25;
  bool identity_motion = false;
  double max_speed = 0.5;
  HttpEndpoint remote;
};

enum class FrameSelection { LastLatent, AllFrames };

struct EditConfig {
  std::size_t frames = 33;
  std::size_t steps = 8;
  std::size_t stride = 3;
  double tld_threshold = 0.9;
  double switch_t = 0.9;
  std::uint64_t seed = 20251016;
  CodecSpec codec;
  BackendConfig backend;
  bool enhance = true;
  bool refine = true;
  bool tld = true;
  FrameSelection selection = FrameSelection::LastLatent;
  RefineConfig refine_config;
  std::optional<VlmEndpoint> vlm;
  bool keep_step_latents = false;

  // ConfigError describing the first violated constraint.
  void validate() const;
};

// Overlays the keys present in `doc` onto `base`. Unknown keys are errors.
EditConfig config_from_json(const nlohmann::json& doc, EditConfig base = {});
nlohmann::json config_to_json(const EditConfig& config);

struct EditRequest {
  Image input_image;
  std::string instruction;
  EditConfig config;
};

struct ConditioningPack {
  VideoLatent y;
  TemporalMask m;
};

struct StepSnapshot {
  std::string_view phase;
  std::size_t step;
  double t;
  const VideoLatent& z_next;
  const VideoLatent& x0_pred;
  const std::vector<std::size_t>& frames;
};
using StepObserver = std::function<void(const StepSnapshot&)>;

struct GeneratedClip {
  VideoLatent final_latent;
  std::vector<std::size_t> latent_frames;  // original indices kept in final_latent
  PixelVideo video;
};

struct FrameProvenance {
  std::string clip;  // "edit" or "refine"
  std::size_t index = 0;
};

struct EditResult {
  Image final_frame;  // unclamped; clamp when writing
  FrameProvenance provenance;
  CandidateFrames candidates;
  SharpnessReport sharpness;
  std::optional<RefineOutcome> refinement;
  ComputeLedger ledger;
  EnhancedPrompt prompt;
  VideoLatent final_latent;
  std::vector<std::size_t> latent_frames;
  std::vector<VideoLatent> step_latents;  // filled when keep_step_latents
  std::size_t scorer_calls = 0;
  double wall_ms = 0.0;

  std::string determinism_hash() const;
};

std::shared_ptr<const DenoiserBackend> make_backend(const BackendConfig& config, const CodecSpec& codec,
                                                    std::uint64_t seed);

class Pipeline {
 public:
  explicit Pipeline(EditConfig config, std::shared_ptr<const DenoiserBackend> backend = nullptr);

  const EditConfig& config() const noexcept { return config_; }
  const Codec& codec() const noexcept { return codec_; }

  // Pseudo-video [image, 0, ..., 0] encoded, plus the first-frame mask.
  ConditioningPack build_conditioning(const Image& image, std::size_t frames) const;

  // One denoising run: noise, per-step dropout/predict/Euler/ledger, decode.
  GeneratedClip generate(const Image& image, std::string_view prompt, std::size_t frames, std::size_t steps,
                         std::uint64_t seed, ComputeLedger& ledger, std::string_view phase,
                         const StepObserver& observer = {}) const;

  EditResult edit(const Image& image, std::string_view instruction, const StepObserver& observer = {},
                  const FrameScorer& scorer = laplacian_score) const;

 private:
  EditConfig config_;
  Codec codec_;
  MoEDenoiser moe_;
};

EditResult edit(const EditRequest& request);

// PSNR in dB between two frames clamped to [0, 1]; +inf when identical.
double psnr(const Image& a, const Image& b);

}  // namespace ifedit
