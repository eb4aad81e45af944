#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "ifedit/scheduler.hpp"
#include "ifedit/tensor.hpp"

namespace ifedit {

// {0, K, 2K, ...} below frames, plus frames - 1 when it is off the grid.
std::vector<std::size_t> dropout_indices(std::size_t frames, std::size_t stride);

struct DropoutPolicy {
  std::size_t stride = 3;
  double threshold = 0.9;
  bool applied = false;
};

// Tensors that temporal dropout subsamples together. `frames` tracks the
// original latent-frame index of every remaining slice.
struct TldState {
  VideoLatent z;
  VideoLatent y;
  TemporalMask m;
  std::vector<std::size_t> frames;
  DropoutPolicy policy;
};

// One-shot: subsamples z, y, m and frames once t <= threshold, then never again.
TldState maybe_apply(TldState state, double t);

struct TokenSteps {
  std::uint64_t baseline = 0;
  std::uint64_t reduced = 0;
  double speedup() const noexcept { return reduced ? static_cast<double>(baseline) / static_cast<double>(reduced) : 0.0; }
};

// Token-steps of a full run versus one with dropout fired at the first grid
// step with t <= threshold on make_schedule(steps).
TokenSteps predicted_token_steps(std::size_t frames, std::size_t steps, double threshold, std::size_t stride,
                                 std::size_t height, std::size_t width);

struct StepRecord {
  std::size_t step = 0;
  double t = 0.0;
  ExpertPhase expert = ExpertPhase::HighNoise;
  std::size_t frames = 0;
  std::size_t sites = 0;
  std::uint64_t token_steps = 0;
  std::string phase;  // "edit" or "refine"
};

// Append-only per-step compute record. Appends are serialized.
class ComputeLedger {
 public:
  ComputeLedger() = default;
  ComputeLedger(const ComputeLedger& other);
  ComputeLedger& operator=(const ComputeLedger& other);

  void append(StepRecord record);
  std::vector<StepRecord> records() const;
  std::size_t size() const;
  std::uint64_t total_token_steps() const;
  std::uint64_t total_token_steps(const std::string& phase) const;

  // Columns step,t,expert,frames,token_steps.
  std::string to_csv() const;

 private:
  mutable std::mutex mu_;
  std::vector<StepRecord> records_;
  std::uint64_t total_ = 0;
};

}  // namespace ifedit
