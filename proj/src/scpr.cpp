#include "ifedit/scpr.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "ifedit/error.hpp"

namespace ifedit {

double laplacian_score(const Image& frame) {
  const std::size_t h = frame.height();
  const std::size_t w = frame.width();
  if (h == 0 || w == 0) throw ArgumentError("cannot score an empty frame");

  std::vector<double> gray(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      gray[r * w + c] = (static_cast<double>(frame.at(r, c, 0)) + frame.at(r, c, 1) + frame.at(r, c, 2)) / 3.0;
    }
  }
  auto g = [&](std::size_t r, std::size_t c) { return gray[r * w + c]; };

  double sum = 0.0;
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t up = r == 0 ? 0 : r - 1;
    const std::size_t down = r + 1 == h ? r : r + 1;
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t left = c == 0 ? 0 : c - 1;
      const std::size_t right = c + 1 == w ? c : c + 1;
      const double response = g(up, c) + g(down, c) + g(r, left) + g(r, right) - 4.0 * g(r, c);
      sum += std::abs(response);
    }
  }
  return sum / static_cast<double>(h * w);
}

std::string SharpnessReport::to_json() const {
  return nlohmann::json{{"scores", scores}, {"selected", selected}, {"selected_score", selected_score}}.dump(2);
}

SharpnessReport select_by_scores(std::vector<double> scores) {
  if (scores.empty()) throw ArgumentError("cannot select from an empty frame list");
  // max_element returns the first maximum.
  const auto best = std::max_element(scores.begin(), scores.end());
  SharpnessReport report;
  report.selected = static_cast<std::size_t>(best - scores.begin());
  report.selected_score = *best;
  report.scores = std::move(scores);
  return report;
}

SharpnessReport select_sharpest(std::span<const Image> frames, const FrameScorer& scorer) {
  if (frames.empty()) throw ArgumentError("cannot select from an empty frame list");
  std::vector<double> scores;
  scores.reserve(frames.size());
  for (const auto& f : frames) scores.push_back(scorer(f));
  return select_by_scores(std::move(scores));
}

CandidateFrames candidate_frames(const PixelVideo& video, std::size_t temporal_factor) {
  if (temporal_factor == 0) throw ArgumentError("temporal factor must be >= 1");
  if (video.size() > 1 && video.size() <= temporal_factor) {
    throw ShapeError("a " + std::to_string(video.size()) + "-frame video is not 1 + q * n frames for q = " +
                     std::to_string(temporal_factor));
  }
  CandidateFrames out;
  const std::size_t first = video.size() == 1 ? 0 : video.size() - temporal_factor;
  for (std::size_t i = first; i < video.size(); ++i) {
    out.indices.push_back(i);
    out.frames.push_back(video[i]);
  }
  return out;
}

RefineOutcome refine(const Image& x_star, const RefineConfig& cfg, const ClipGenerator& generate,
                     const FrameScorer& scorer) {
  if (cfg.steps == 0) throw ArgumentError("refinement needs at least one denoising step");
  if (cfg.frames == 0) throw ArgumentError("refinement clip needs at least one frame");
  if (cfg.still_prompt.empty()) throw ArgumentError("refinement prompt must be non-empty");
  const PixelVideo clip = generate(x_star, cfg.still_prompt, cfg.frames, cfg.steps);
  SharpnessReport report = select_sharpest(clip.frames(), scorer);
  const std::size_t index = report.selected;
  return RefineOutcome{clip[index], index, std::move(report)};
}

}  // namespace ifedit
