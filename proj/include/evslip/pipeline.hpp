#ifndef EVSLIP_PIPELINE_HPP
#define EVSLIP_PIPELINE_HPP

#include <span>
#include <vector>

#include "evslip/closed_loop.hpp"
#include "evslip/harris.hpp"
#include "evslip/slip.hpp"

namespace evslip {

/// Windows of a recorded log, starting at window 0.
struct LabeledLog {
  std::vector<LabeledEvent> events;
  std::vector<WindowCounts> windows;
};

LabeledLog label_log(std::span<const Event> events, const SensorGeometry& geometry, TimeUs dt_us,
                     const HarrisParams& params = {});

/// Noise thresholds of a log recorded with nothing moving. Throws EmptySample.
NoiseThresholds sample_log(std::span<const Event> events, const SensorGeometry& geometry,
                           TimeUs dt_us, const HarrisParams& params = {});

struct DetectionResult {
  NoiseThresholds thresholds;
  DetectorConfig config;
  std::vector<WindowRecord> windows;
  std::vector<SlipEpisode> baseline;
  std::vector<SlipEpisode> feature;
};

/// Runs both detectors over already tallied windows with frozen thresholds.
DetectionResult detect_windows(std::span<const WindowCounts> windows, const NoiseThresholds& thresholds,
                               const DetectorConfig& cfg);

/// Labels a log, then runs detect_windows over it.
DetectionResult detect_log(std::span<const Event> events, const SensorGeometry& geometry,
                           const NoiseThresholds& thresholds, const DetectorConfig& cfg,
                           const HarrisParams& params = {});

}  // namespace evslip

#endif  // EVSLIP_PIPELINE_HPP
