#ifndef EVSLIP_EMULATOR_HPP
#define EVSLIP_EMULATOR_HPP

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "evslip/event.hpp"

namespace evslip {

enum class MarkerShape { Square, Rectangle, Circle };

std::string_view to_string(MarkerShape s) noexcept;
MarkerShape marker_shape_from_string(std::string_view s);

struct ContourPoint {
  Eigen::Vector2d offset;  // pixels, relative to the marker pose
  bool corner_like = false;
};

/// Outline of a marker sampled at unit arc-length spacing. The pose is the
/// pixel position of the marker centre; sub-pixel values are meaningful.
struct Marker {
  MarkerShape shape = MarkerShape::Square;
  std::vector<ContourPoint> contour;
  std::vector<Eigen::Vector2d> vertices;  // relative to the pose; empty for circles
  Eigen::Vector2d pose = Eigen::Vector2d::Zero();

  /// width x height polygon rotated by tilt (radians) about its centre.
  static Marker rectangle(double width, double height, double tilt, Eigen::Vector2d pose);
  static Marker square(double side, double tilt, Eigen::Vector2d pose) {
    Marker m = rectangle(side, side, tilt, pose);
    m.shape = MarkerShape::Square;
    return m;
  }
  static Marker circle(double radius, Eigen::Vector2d pose);

  /// True iff every contour point lies inside the sensor at the current pose.
  bool fits(const SensorGeometry& geometry) const;
};

/// Brightness-change bursts, e.g. a light source moving through the scene.
/// Within [t_start, t_end) the background rate is scaled by a raised-cosine
/// envelope peaking at `multiplier` mid-burst.
struct FlickerBurst {
  TimeUs t_start = 0;
  TimeUs t_end = 0;
  double multiplier = 1.0;
};

struct Vibration {
  double amplitude_px = 0.0;
  double frequency_hz = 0.0;
};

struct NoiseModel {
  double base_rate = 10'000.0;  // events per second over the whole sensor
  std::vector<FlickerBurst> flicker_schedule;
  Vibration vibration;
  std::uint64_t rng_seed = 1;

  double rate_at(TimeUs t) const noexcept;
  void validate() const;
};

/// Emulator tick; pose changes are resolved at this granularity.
inline constexpr TimeUs kEmulatorTickUs = 50;

/// Generates marker events by integer-pixel crossings of the contour points
/// plus Poisson background activity. Each crossing emits one event at the new
/// pixel, timestamped at the interpolated crossing instant, with polarity
/// given by the direction of motion.
class EventEmulator {
 public:
  EventEmulator(SensorGeometry geometry, Marker marker, NoiseModel noise, TimeUs latency_us = 0);

  /// Appends the time-ordered events of (t0, t1] while the marker moves
  /// linearly from its current pose to `pose_next`.
  void advance(TimeUs t0, TimeUs t1, const Eigen::Vector2d& pose_next, std::vector<Event>& out,
               bool with_noise = true);

  /// Vibration offset added to the pose at time t.
  Eigen::Vector2d jitter(TimeUs t) const;

  const Marker& marker() const noexcept { return marker_; }
  const SensorGeometry& geometry() const noexcept { return geometry_; }
  const NoiseModel& noise() const noexcept { return noise_; }

  /// Contour points that are currently corner-like, in pixel coordinates.
  std::vector<Eigen::Vector2d> corner_positions() const;

 private:
  void tick(TimeUs t0, TimeUs t1, const Eigen::Vector2d& pose_next, std::vector<Event>& out,
            bool with_noise);

  SensorGeometry geometry_;
  Marker marker_;
  NoiseModel noise_;
  TimeUs latency_us_;
  std::mt19937_64 rng_;
  Eigen::Vector2d applied_pose_;  // pose including jitter at the last tick
  std::vector<Eigen::Vector2i> pixels_;
  std::vector<Event> scratch_;
};

/// Stateless form: events of one interval moving the marker from pose_prev
/// to pose_next. Requires t1 - t0 >= kEmulatorTickUs.
std::vector<Event> synthesize_events(const Marker& marker, const Eigen::Vector2d& pose_prev,
                                     const Eigen::Vector2d& pose_next, const NoiseModel& noise,
                                     TimeUs t0, TimeUs t1, const SensorGeometry& geometry = {});

}  // namespace evslip

#endif  // EVSLIP_EMULATOR_HPP
