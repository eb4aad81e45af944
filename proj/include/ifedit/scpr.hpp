#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ifedit/tensor.hpp"

namespace ifedit {

// Mean absolute 4-neighbour Laplacian of the channel-mean grayscale frame,
// with edge-replicate padding. Zero for constant frames.
double laplacian_score(const Image& frame);

using FrameScorer = std::function<double(const Image&)>;

struct SharpnessReport {
  std::vector<double> scores;
  std::size_t selected = 0;
  double selected_score = 0.0;

  // {"scores": [...], "selected": i, "selected_score": s}
  std::string to_json() const;
};

// Argmax with ties resolved to the lowest index.
SharpnessReport select_by_scores(std::vector<double> scores);
SharpnessReport select_sharpest(std::span<const Image> frames, const FrameScorer& scorer = laplacian_score);

struct CandidateFrames {
  std::vector<std::size_t> indices;  // positions in the decoded video
  std::vector<Image> frames;
};

// Frames decoded from the final latent frame: the last q frames, or frame 0
// alone for a single-latent clip.
CandidateFrames candidate_frames(const PixelVideo& video, std::size_t temporal_factor);

struct RefineConfig {
  std::string still_prompt = "A perfectly still video that enhances image clarity and fine details";
  std::size_t frames = 9;
  std::size_t steps = 4;
};

// Produces a decoded clip conditioned on `image` and driven by `prompt`.
using ClipGenerator =
    std::function<PixelVideo(const Image& image, std::string_view prompt, std::size_t frames, std::size_t steps)>;

struct RefineOutcome {
  Image frame;
  std::size_t clip_index = 0;  // position inside the refinement clip
  SharpnessReport report;
};

// Re-generates a still clip from x_star and keeps its sharpest frame.
RefineOutcome refine(const Image& x_star, const RefineConfig& cfg, const ClipGenerator& generate,
                     const FrameScorer& scorer = laplacian_score);

}  // namespace ifedit
