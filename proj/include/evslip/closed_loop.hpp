#ifndef EVSLIP_CLOSED_LOOP_HPP
#define EVSLIP_CLOSED_LOOP_HPP

#include <Eigen/Core>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evslip/labeled_event.hpp"
#include "evslip/scenario.hpp"

namespace evslip {

class NoCorners : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Labeled events accumulated over [t_begin, t_end).
struct EventFrame {
  TimeUs t_begin = 0;
  TimeUs t_end = 0;
  std::vector<LabeledEvent> events;

  std::size_t corner_count() const noexcept;
  /// Mean pixel position of the corner-labeled events. Throws NoCorners.
  Eigen::Vector2d corner_centroid() const;
};

/// Keeps the events within `radius` px of the densest cluster of corner
/// events, located by a few mean-shift iterations started from the corner
/// event with the most corner neighbours. Frames without corners come back
/// unchanged.
EventFrame focus_frame(const EventFrame& frame, double radius);

/// Distance between the corner centroids of two frames, in mm.
double slip_metric(const EventFrame& a, const EventFrame& b, double mm_per_px);

/// A maximal interval of ground-truth slipping, [t_start, t_end).
struct SlipInterval {
  TimeUs t_start = 0;
  TimeUs t_end = 0;
  double displacement_mm = 0.0;
  bool monitored = false;  // starts while monitoring

  /// Large enough to move the marker by at least one pixel.
  bool observable(double mm_per_px) const noexcept { return displacement_mm >= mm_per_px; }
};

/// Per-interval outcome for one approach.
struct IntervalMatch {
  bool detected = false;
  std::optional<TimeUs> latency_us;  // first matching flag's t_detect minus t_start
  std::optional<SlipKind> first_kind;
};

struct ApproachSummary {
  Approach approach = Approach::Feature;
  std::vector<SlipEvent> flags;
  std::size_t episodes = 0;
  std::size_t false_flags = 0;
  std::size_t false_episodes = 0;
  std::vector<IntervalMatch> intervals;  // parallel to SimulationReport::slip_intervals
  /// Every observable monitored interval detected and no false episode.
  bool success = false;
};

struct CommandRecord {
  TimeUs t = 0;
  double percent = 0.0;
  double estimate = 0.0;
};

struct WindowRecord {
  WindowCounts counts;
  Stage stage = Stage::Sampling;
  bool baseline_flag = false;
  bool feature_flag = false;
};

struct GroundTruthSample {
  TimeUs t = 0;
  bool slipping = false;
  double y_pos = 0.0;
};

struct ForceSample {
  TimeUs t = 0;
  double setpoint = 0.0;
  double grip = 0.0;
  double normal_force_n = 0.0;
};

struct SimulationReport {
  std::string scenario;
  std::uint64_t seed = 0;
  TimeUs dt_us = 0;
  double s_bias = 0.0;
  NoiseThresholds thresholds;
  std::size_t sampled_windows = 0;
  std::size_t monitored_windows = 0;
  std::size_t total_events = 0;
  std::size_t corner_events = 0;
  std::size_t edge_events = 0;

  std::vector<SlipInterval> slip_intervals;
  ApproachSummary baseline;
  ApproachSummary feature;

  std::vector<CommandRecord> commands;
  std::vector<SuppressionTrace> fuzzy_trace;

  bool final_slipping = false;
  double final_y_mm = 0.0;
  std::optional<double> q_sm_mm;
  std::string q_sm_error;  // set when q_sm_mm is empty
  /// A monitored slip happened, a command followed it, and the object ends
  /// at rest.
  bool suppressed = false;
};

struct RunOptions {
  bool record_events = false;
  bool record_windows = false;
  bool record_ground_truth = false;
  TimeUs force_trace_every_us = 1'000;
};

struct SimulationOutput {
  SimulationReport report;
  std::vector<Event> events;
  std::vector<WindowRecord> windows;
  std::vector<GroundTruthSample> ground_truth;
  std::vector<ForceSample> force;
};

/// Flags within this many windows after a slip interval ends still count as
/// detections of it.
inline constexpr int kMatchToleranceWindows = 2;

/// Runs the scenario: actuator -> plant -> emulator -> labeler -> windows ->
/// stage controller -> suppression -> actuator, in emulator ticks.
SimulationOutput run_closed_loop(const Scenario& scenario, const RunOptions& options = {});

}  // namespace evslip

#endif  // EVSLIP_CLOSED_LOOP_HPP
