#ifndef EVSLIP_SLIP_HPP
#define EVSLIP_SLIP_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "evslip/windows.hpp"

namespace evslip {

class EmptySample : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StageViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Per-window maxima observed while nothing in the scene moves.
struct NoiseThresholds {
  std::uint32_t th_rmax = 0;
  std::uint32_t th_emax = 0;
  std::uint32_t th_cmax = 0;

  friend bool operator==(const NoiseThresholds&, const NoiseThresholds&) = default;
};

struct DetectorConfig {
  TimeUs dt_us = 500;
  double s_bias = 0.10;
  TimeUs episode_gap_us = 100'000;

  void validate() const;
};

enum class SlipKind { Incipient, Gross };
enum class Approach { Baseline, Feature };

std::string_view to_string(SlipKind k) noexcept;
std::string_view to_string(Approach a) noexcept;

/// One flagged window. Baseline events carry s_r; feature events carry
/// (s_e, s_c). t_detect is the end of the window, when the decision is made.
struct SlipEvent {
  std::int64_t window_index = 0;
  SlipKind kind = SlipKind::Gross;
  Approach approach = Approach::Feature;
  std::uint32_t s_r = 0;
  std::uint32_t s_e = 0;
  std::uint32_t s_c = 0;
  TimeUs t_detect = 0;

  friend bool operator==(const SlipEvent&, const SlipEvent&) = default;
};

struct FeatureMagnitude {
  std::uint32_t s_e = 0;
  std::uint32_t s_c = 0;
};

/// Max of each tally over the sampled windows. Throws EmptySample.
NoiseThresholds sample_noise_thresholds(std::span<const WindowCounts> windows);

/// Running form of sample_noise_thresholds.
class NoiseSampler {
 public:
  void add(const WindowCounts& w) noexcept;
  std::size_t size() const noexcept { return count_; }
  NoiseThresholds thresholds() const;

 private:
  NoiseThresholds max_;
  std::size_t count_ = 0;
};

/// A count triggers when it reaches the biased threshold th * (1 + s_bias)
/// and strictly exceeds the unbiased noise maximum th. The band
/// th <= count < th * (1 + s_bias) is treated as no-slip.
bool exceeds_threshold(std::uint32_t count, std::uint32_t threshold, double s_bias) noexcept;

std::optional<std::uint32_t> detect_baseline(const WindowCounts& w, const NoiseThresholds& th,
                                             const DetectorConfig& cfg) noexcept;

/// Both the edge and the corner tallies must trigger.
std::optional<FeatureMagnitude> detect_feature(const WindowCounts& w, const NoiseThresholds& th,
                                               const DetectorConfig& cfg) noexcept;

/// Splits flagged windows into episodes: a flag after at least episode_gap of
/// unflagged time opens a new episode.
class EpisodeTracker {
 public:
  explicit EpisodeTracker(const DetectorConfig& cfg) : dt_(cfg.dt_us), gap_(cfg.episode_gap_us) {}

  SlipKind classify(std::int64_t window_index) noexcept;

 private:
  TimeUs dt_;
  TimeUs gap_;
  std::optional<std::int64_t> last_;
};

struct SlipEpisode {
  std::vector<SlipEvent> windows;  // front() is the Incipient head

  const SlipEvent& head() const { return windows.front(); }
};

/// Groups time-ordered flags of a single approach into episodes and sets
/// each flag's kind.
std::vector<SlipEpisode> extract_incipient(std::span<const SlipEvent> flags,
                                           const DetectorConfig& cfg);

enum class Stage { Sampling, Grasping, Monitoring };
std::string_view to_string(Stage s) noexcept;

struct StageState {
  Stage stage = Stage::Sampling;
  std::optional<NoiseThresholds> thresholds;
  double grip_percent = 0.0;
};

/// Sampling -> Grasping -> Monitoring. Windows fed while sampling build the
/// noise thresholds, which freeze when the grasp begins. Windows fed while
/// grasping are ignored. While monitoring, both detectors run on every window.
class StageController {
 public:
  explicit StageController(DetectorConfig cfg = {});

  /// Starts directly in Monitoring with externally sampled thresholds.
  static StageController monitoring(const NoiseThresholds& th, DetectorConfig cfg = {});

  void begin_grasp(double g_min_percent);
  void begin_monitoring();

  std::vector<SlipEvent> feed(const WindowCounts& w);

  const StageState& state() const noexcept { return state_; }
  const DetectorConfig& config() const noexcept { return cfg_; }
  std::size_t sampled_windows() const noexcept { return sampler_.size(); }

 private:
  DetectorConfig cfg_;
  StageState state_;
  NoiseSampler sampler_;
  EpisodeTracker baseline_episodes_;
  EpisodeTracker feature_episodes_;
};

}  // namespace evslip

#endif  // EVSLIP_SLIP_HPP
