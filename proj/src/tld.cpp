#include "ifedit/tld.hpp"

#include <cstdio>

#include "ifedit/error.hpp"

namespace ifedit {

std::vector<std::size_t> dropout_indices(std::size_t frames, std::size_t stride) {
  if (stride == 0) throw ArgumentError("dropout stride K must be >= 1");
  if (frames == 0) throw ArgumentError("dropout needs at least one latent frame");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < frames; i += stride) keep.push_back(i);
  if (keep.back() != frames - 1) keep.push_back(frames - 1);
  return keep;
}

TldState maybe_apply(TldState state, double t) {
  if (state.policy.applied || !(t <= state.policy.threshold)) return state;
  const auto keep = dropout_indices(state.z.frames(), state.policy.stride);
  std::vector<std::size_t> frames;
  frames.reserve(keep.size());
  for (auto i : keep) frames.push_back(state.frames.at(i));
  return TldState{temporal_select(state.z, keep), temporal_select(state.y, keep), temporal_select(state.m, keep),
                  std::move(frames), DropoutPolicy{state.policy.stride, state.policy.threshold, true}};
}

TokenSteps predicted_token_steps(std::size_t frames, std::size_t steps, double threshold, std::size_t stride,
                                 std::size_t height, std::size_t width) {
  const NoiseSchedule schedule = make_schedule(steps);
  const std::uint64_t sites = static_cast<std::uint64_t>(height) * width;
  const std::uint64_t kept = dropout_indices(frames, stride).size();
  TokenSteps out;
  bool dropped = false;
  for (const auto& s : schedule.steps()) {
    if (s.t <= threshold) dropped = true;
    out.baseline += frames * sites;
    out.reduced += (dropped ? kept : frames) * sites;
  }
  return out;
}

ComputeLedger::ComputeLedger(const ComputeLedger& other) {
  std::lock_guard lock(other.mu_);
  records_ = other.records_;
  total_ = other.total_;
}

ComputeLedger& ComputeLedger::operator=(const ComputeLedger& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  records_ = other.records_;
  total_ = other.total_;
  return *this;
}

void ComputeLedger::append(StepRecord record) {
  std::lock_guard lock(mu_);
  total_ += record.token_steps;
  records_.push_back(std::move(record));
}

std::vector<StepRecord> ComputeLedger::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t ComputeLedger::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::uint64_t ComputeLedger::total_token_steps() const {
  std::lock_guard lock(mu_);
  return total_;
}

std::uint64_t ComputeLedger::total_token_steps(const std::string& phase) const {
  std::lock_guard lock(mu_);
  std::uint64_t sum = 0;
  for (const auto& r : records_) {
    if (r.phase == phase) sum += r.token_steps;
  }
  return sum;
}

std::string ComputeLedger::to_csv() const {
  std::lock_guard lock(mu_);
  std::string out = "step,t,expert,frames,token_steps\n";
  char line[128];
  for (const auto& r : records_) {
    std::snprintf(line, sizeof(line), "%zu,%.6f,%s,%zu,%llu\n", r.step, r.t, std::string(to_string(r.expert)).c_str(),
                  r.frames, static_cast<unsigned long long>(r.token_steps));
    out += line;
  }
  return out;
}

}  // namespace ifedit
