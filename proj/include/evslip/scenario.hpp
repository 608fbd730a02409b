#ifndef EVSLIP_SCENARIO_HPP
#define EVSLIP_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evslip/emulator.hpp"
#include "evslip/fuzzy.hpp"
#include "evslip/harris.hpp"
#include "evslip/plant.hpp"
#include "evslip/slip.hpp"

namespace evslip {

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Text that is not JSON at all.
class ScenarioSyntaxError : public ScenarioError {
 public:
  using ScenarioError::ScenarioError;
};

struct MarkerSpec {
  MarkerShape shape = MarkerShape::Square;
  double width_px = 40.0;   // side for squares, diameter for circles
  double height_px = 40.0;  // rectangles only
  double tilt_rad = 0.5;
  double x_px = 120.3;      // initial centre
  double y_px = 45.6;

  Marker build() const;
};

/// Upward gripper acceleration over [t_start, t_end), e.g. the start of a lift.
struct ArmMotion {
  TimeUs t_start = 0;
  TimeUs t_end = 0;
  double accel = 0.0;  // m/s^2
};

/// A load dropped onto the held object from a height drawn uniformly from
/// [height_min_m, height_max_m]; a fraction `coupling` of its impact
/// momentum reaches the object.
struct LoadDrop {
  TimeUs t = 0;
  double mass = 0.2;
  double height_min_m = 0.04;
  double height_max_m = 0.08;
  double coupling = 0.25;
  TimeUs time_jitter_us = 2'000;
};

/// Timeline of one grasp session. Monitoring starts at grasp_time +
/// settle_us; the object rests on its support until lift_time and again from
/// place_time on, when set.
struct Timeline {
  TimeUs sampling_start = 2'000'000;
  TimeUs grasp_time = 4'000'000;
  TimeUs settle_us = 100'000;
  TimeUs lift_time = 4'200'000;
  std::optional<TimeUs> place_time;
  TimeUs end_time = 5'500'000;
};

struct Scenario {
  std::string name = "custom";
  std::uint64_t seed = 1;
  SensorGeometry geometry;
  double mm_per_px = 0.05;
  TimeUs sensor_latency_us = 0;

  MarkerSpec marker;
  NoiseModel noise;
  /// Vibration is active during sampling as well when set.
  bool vibration_during_sampling = true;

  PlantState plant;  // masses, friction, N per percent; motion fields ignored
  ActuatorParams actuator;

  Timeline timeline;
  std::vector<ArmMotion> arm_motions;
  std::vector<LoadDrop> loads;

  DetectorConfig detector;
  HarrisParams harris;
  /// fuzzy.g_min doubles as the grip closed at the grasp.
  FuzzyConfig fuzzy;
  bool suppression_enabled = true;

  /// Length of the two event frames compared by the slip metric.
  TimeUs frame_us = 100'000;
  /// Corner events farther than this from the marker cluster centre are
  /// left out of a frame's centroid.
  double frame_radius_px = 60.0;

  void validate() const;
};

/// JSON form of a scenario. Missing keys keep their defaults; unknown keys
/// are rejected. Throws ScenarioError.
Scenario parse_scenario(std::string_view json_text);
std::string dump_scenario(const Scenario& s);
Scenario load_scenario_file(const std::string& path);

/// Names of the built-in scenarios.
std::vector<std::string> bundled_scenario_names();

/// Built-in scenario by name; throws ScenarioError for unknown names.
Scenario bundled_scenario(const std::string& name, std::uint64_t seed = 1);

/// Fuzzy input ranges calibrated from emulator slip trials.
FuzzyConfig calibrated_fuzzy_config();

}  // namespace evslip

#endif  // EVSLIP_SCENARIO_HPP
