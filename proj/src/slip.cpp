#include "evslip/slip.hpp"

#include <algorithm>
#include <cmath>

namespace evslip {

void DetectorConfig::validate() const {
  if (dt_us <= 0) throw std::invalid_argument("window width dt_us must be positive");
  if (!(s_bias >= 0.0)) throw std::invalid_argument("s_bias must be nonnegative");
  if (episode_gap_us < 0) throw std::invalid_argument("episode_gap_us must be nonnegative");
}

std::string_view to_string(SlipKind k) noexcept {
  return k == SlipKind::Incipient ? "incipient" : "gross";
}

std::string_view to_string(Approach a) noexcept {
  return a == Approach::Baseline ? "baseline" : "feature";
}

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::Sampling:
      return "sampling";
    case Stage::Grasping:
      return "grasping";
    case Stage::Monitoring:
      return "monitoring";
  }
  return "sampling";
}

void NoiseSampler::add(const WindowCounts& w) noexcept {
  max_.th_rmax = std::max(max_.th_rmax, w.c_raw);
  max_.th_emax = std::max(max_.th_emax, w.c_edge);
  max_.th_cmax = std::max(max_.th_cmax, w.c_corner);
  ++count_;
}

NoiseThresholds NoiseSampler::thresholds() const {
  if (count_ == 0) throw EmptySample("noise sampling interval contains no windows");
  return max_;
}

NoiseThresholds sample_noise_thresholds(std::span<const WindowCounts> windows) {
  NoiseSampler sampler;
  for (const auto& w : windows) sampler.add(w);
  return sampler.thresholds();
}

bool exceeds_threshold(std::uint32_t count, std::uint32_t threshold, double s_bias) noexcept {
  if (count <= threshold) return false;
  const double th = static_cast<double>(threshold);
  // Tolerance keeps exact products such as 100 * 1.1 from rounding above 110.
  return static_cast<double>(count) >= th + s_bias * th - 1e-9;
}

std::optional<std::uint32_t> detect_baseline(const WindowCounts& w, const NoiseThresholds& th,
                                             const DetectorConfig& cfg) noexcept {
  if (exceeds_threshold(w.c_raw, th.th_rmax, cfg.s_bias)) return w.c_raw;
  return std::nullopt;
}

std::optional<FeatureMagnitude> detect_feature(const WindowCounts& w, const NoiseThresholds& th,
                                               const DetectorConfig& cfg) noexcept {
  if (exceeds_threshold(w.c_edge, th.th_emax, cfg.s_bias) &&
      exceeds_threshold(w.c_corner, th.th_cmax, cfg.s_bias)) {
    return FeatureMagnitude{w.c_edge, w.c_corner};
  }
  return std::nullopt;
}

SlipKind EpisodeTracker::classify(std::int64_t window_index) noexcept {
  SlipKind kind = SlipKind::Incipient;
  if (last_) {
    const TimeUs quiet = (window_index - *last_ - 1) * dt_;
    if (quiet < gap_) kind = SlipKind::Gross;
  }
  last_ = window_index;
  return kind;
}

std::vector<SlipEpisode> extract_incipient(std::span<const SlipEvent> flags,
                                           const DetectorConfig& cfg) {
  cfg.validate();
  EpisodeTracker tracker(cfg);
  std::vector<SlipEpisode> episodes;
  std::optional<std::int64_t> prev;
  for (SlipEvent f : flags) {
    if (prev && f.window_index <= *prev)
      throw std::invalid_argument("slip flags must be strictly ordered by window");
    prev = f.window_index;
    f.kind = tracker.classify(f.window_index);
    if (f.kind == SlipKind::Incipient) episodes.emplace_back();
    episodes.back().windows.push_back(f);
  }
  return episodes;
}

StageController::StageController(DetectorConfig cfg)
    : cfg_(cfg), baseline_episodes_(cfg), feature_episodes_(cfg) {
  cfg_.validate();
}

StageController StageController::monitoring(const NoiseThresholds& th, DetectorConfig cfg) {
  StageController c(cfg);
  c.state_.stage = Stage::Monitoring;
  c.state_.thresholds = th;
  return c;
}

void StageController::begin_grasp(double g_min_percent) {
  if (state_.stage != Stage::Sampling)
    throw StageViolation("grasp can only follow the sampling stage");
  if (!(g_min_percent >= 0.0 && g_min_percent <= 100.0))
    throw std::invalid_argument("minimal grip force must lie in [0, 100] percent");
  state_.thresholds = sampler_.thresholds();
  state_.stage = Stage::Grasping;
  state_.grip_percent = g_min_percent;
}

void StageController::begin_monitoring() {
  if (state_.stage != Stage::Grasping || !state_.thresholds)
    throw StageViolation("monitoring requires sampled noise thresholds and an executed grasp");
  state_.stage = Stage::Monitoring;
}

std::vector<SlipEvent> StageController::feed(const WindowCounts& w) {
  std::vector<SlipEvent> out;
  switch (state_.stage) {
    case Stage::Sampling:
      sampler_.add(w);
      return out;
    case Stage::Grasping:
      return out;
    case Stage::Monitoring:
      break;
  }
  if (!state_.thresholds) throw StageViolation("window fed to monitoring before thresholds exist");
  const NoiseThresholds& th = *state_.thresholds;
  const TimeUs t_detect = w.t_start + cfg_.dt_us;
  if (auto s_r = detect_baseline(w, th, cfg_)) {
    SlipEvent e;
    e.window_index = w.window_index;
    e.approach = Approach::Baseline;
    e.kind = baseline_episodes_.classify(w.window_index);
    e.s_r = *s_r;
    e.t_detect = t_detect;
    out.push_back(e);
  }
  if (auto m = detect_feature(w, th, cfg_)) {
    SlipEvent e;
    e.window_index = w.window_index;
    e.approach = Approach::Feature;
    e.kind = feature_episodes_.classify(w.window_index);
    e.s_e = m->s_e;
    e.s_c = m->s_c;
    e.t_detect = t_detect;
    out.push_back(e);
  }
  return out;
}

}  // namespace evslip
