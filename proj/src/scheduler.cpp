#include "ifedit/scheduler.hpp"

#include "ifedit/error.hpp"

namespace ifedit {

NoiseSchedule::NoiseSchedule(std::vector<ScheduleStep> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) throw ArgumentError("schedule needs at least one step");
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const auto& s = steps_[i];
    if (!(s.t > 0.0 && s.t <= 1.0)) throw ArgumentError("schedule timesteps must lie in (0, 1]");
    if (i > 0 && !(s.t < steps_[i - 1].t)) throw ArgumentError("schedule timesteps must strictly decrease");
  }
  if (!(steps_.front().sigma > 0.0)) throw ArgumentError("first step must carry noise (sigma > 0)");
}

NoiseSchedule make_schedule(std::size_t steps) {
  if (steps == 0) throw ArgumentError("step count must be >= 1");
  std::vector<ScheduleStep> grid;
  grid.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = 1.0 - static_cast<double>(i) / static_cast<double>(steps);
    grid.push_back({t, 1.0 - t, t});
  }
  return NoiseSchedule(std::move(grid));
}

double snr(double alpha, double sigma) {
  if (sigma == 0.0) throw DomainError("SNR undefined at sigma = 0");
  return (alpha * alpha) / (sigma * sigma);
}

double snr(double t) { return snr(1.0 - t, t); }

std::string_view to_string(ExpertPhase phase) noexcept {
  return phase == ExpertPhase::HighNoise ? "high" : "low";
}

ExpertPhase expert_for(double t, double switch_t) noexcept {
  return t > switch_t ? ExpertPhase::HighNoise : ExpertPhase::LowNoise;
}

VideoLatent euler_step(const VideoLatent& z_t, const VideoLatent& x0_pred, double t, double t_next) {
  if (z_t.dims() != x0_pred.dims()) {
    throw ShapeError("euler_step: z_t " + to_string(z_t.dims()) + " vs x0_pred " + to_string(x0_pred.dims()));
  }
  if (!(t > 0.0)) throw ArgumentError("euler_step needs t > 0");
  if (!(t_next >= 0.0 && t_next < t)) throw ArgumentError("euler_step needs 0 <= t_next < t");
  if (t_next == 0.0) return x0_pred;

  const double dt = t_next - t;
  auto z = z_t.data();
  auto x0 = x0_pred.data();
  std::vector<float> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double velocity = (static_cast<double>(z[i]) - static_cast<double>(x0[i])) / t;
    out[i] = static_cast<float>(static_cast<double>(z[i]) + dt * velocity);
  }
  return VideoLatent(z_t.dims(), std::move(out));
}

}  // namespace ifedit
