#include "evslip/pipeline.hpp"

namespace evslip {

LabeledLog label_log(std::span<const Event> events, const SensorGeometry& geometry, TimeUs dt_us,
                     const HarrisParams& params) {
  SurfaceOfActiveEvents sae(geometry);
  LabeledLog log;
  log.events = label_stream(events, sae, params);
  if (!log.events.empty()) log.windows = accumulate_windows(log.events, dt_us);
  return log;
}

NoiseThresholds sample_log(std::span<const Event> events, const SensorGeometry& geometry,
                           TimeUs dt_us, const HarrisParams& params) {
  if (events.empty()) throw EmptySample("no events to sample");
  return sample_noise_thresholds(label_log(events, geometry, dt_us, params).windows);
}

DetectionResult detect_windows(std::span<const WindowCounts> windows, const NoiseThresholds& thresholds,
                               const DetectorConfig& cfg) {
  cfg.validate();
  DetectionResult res{thresholds, cfg, {}, {}, {}};
  StageController stages = StageController::monitoring(thresholds, cfg);
  std::vector<SlipEvent> baseline;
  std::vector<SlipEvent> feature;
  res.windows.reserve(windows.size());
  for (const auto& w : windows) {
    WindowRecord rec{w, Stage::Monitoring, false, false};
    for (const SlipEvent& f : stages.feed(w)) {
      if (f.approach == Approach::Baseline) {
        rec.baseline_flag = true;
        baseline.push_back(f);
      } else {
        rec.feature_flag = true;
        feature.push_back(f);
      }
    }
    res.windows.push_back(rec);
  }
  res.baseline = extract_incipient(baseline, cfg);
  res.feature = extract_incipient(feature, cfg);
  return res;
}

DetectionResult detect_log(std::span<const Event> events, const SensorGeometry& geometry,
                           const NoiseThresholds& thresholds, const DetectorConfig& cfg,
                           const HarrisParams& params) {
  cfg.validate();
  return detect_windows(label_log(events, geometry, cfg.dt_us, params).windows, thresholds, cfg);
}

}  // namespace evslip
