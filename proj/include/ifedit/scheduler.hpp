#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "ifedit/tensor.hpp"

namespace ifedit {

struct ScheduleStep {
  double t;
  double alpha;
  double sigma;
};

// Descending timesteps t_1 > ... > t_N in (0, 1]; sampling ends at t = 0.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<ScheduleStep> steps);

  std::size_t size() const noexcept { return steps_.size(); }
  const ScheduleStep& operator[](std::size_t i) const { return steps_[i]; }
  const std::vector<ScheduleStep>& steps() const noexcept { return steps_; }
  // Timestep after step i; 0 for the last step.
  double next_t(std::size_t i) const noexcept { return i + 1 < steps_.size() ? steps_[i + 1].t : 0.0; }

 private:
  std::vector<ScheduleStep> steps_;
};

// Rectified-flow linear grid: t_i = 1 - (i-1)/N, alpha = 1 - t, sigma = t.
NoiseSchedule make_schedule(std::size_t steps);

double snr(double alpha, double sigma);
// SNR on the linear schedule at time t.
double snr(double t);

enum class ExpertPhase { HighNoise, LowNoise };
std::string_view to_string(ExpertPhase phase) noexcept;

// HighNoise iff t > switch_t; the tie goes to LowNoise.
ExpertPhase expert_for(double t, double switch_t) noexcept;

// Euler update with velocity (z_t - x0_pred) / t. Returns x0_pred exactly
// when t_next == 0.
VideoLatent euler_step(const VideoLatent& z_t, const VideoLatent& x0_pred, double t, double t_next);

}  // namespace ifedit
