#include "evslip/emulator.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace evslip {

std::string_view to_string(MarkerShape s) noexcept {
  switch (s) {
    case MarkerShape::Square:
      return "square";
    case MarkerShape::Rectangle:
      return "rectangle";
    case MarkerShape::Circle:
      return "circle";
  }
  return "square";
}

MarkerShape marker_shape_from_string(std::string_view s) {
  if (s == "square") return MarkerShape::Square;
  if (s == "rectangle") return MarkerShape::Rectangle;
  if (s == "circle") return MarkerShape::Circle;
  throw std::invalid_argument("unknown marker shape '" + std::string(s) + "'");
}

Marker Marker::rectangle(double width, double height, double tilt, Eigen::Vector2d pose) {
  if (!(width > 0.0 && height > 0.0)) throw std::invalid_argument("marker dimensions must be positive");
  Marker m;
  m.shape = MarkerShape::Rectangle;
  m.pose = pose;
  const Eigen::Rotation2Dd rot(tilt);
  const double hw = 0.5 * width;
  const double hh = 0.5 * height;
  for (const Eigen::Vector2d& v : {Eigen::Vector2d(-hw, -hh), Eigen::Vector2d(hw, -hh),
                                   Eigen::Vector2d(hw, hh), Eigen::Vector2d(-hw, hh)}) {
    m.vertices.push_back(rot * v);
  }
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    const Eigen::Vector2d& a = m.vertices[i];
    const Eigen::Vector2d& b = m.vertices[(i + 1) % m.vertices.size()];
    const int n = std::max(1, static_cast<int>(std::lround((b - a).norm())));
    for (int k = 0; k < n; ++k) {
      const Eigen::Vector2d p = a + (b - a) * (static_cast<double>(k) / n);
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& v : m.vertices) nearest = std::min(nearest, (p - v).norm());
      m.contour.push_back({p, nearest <= 1.5});
    }
  }
  return m;
}

Marker Marker::circle(double radius, Eigen::Vector2d pose) {
  if (!(radius > 0.0)) throw std::invalid_argument("marker radius must be positive");
  Marker m;
  m.shape = MarkerShape::Circle;
  m.pose = pose;
  const int n = std::max(8, static_cast<int>(std::lround(2.0 * std::numbers::pi * radius)));
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n;
    m.contour.push_back({Eigen::Vector2d(radius * std::cos(a), radius * std::sin(a)), false});
  }
  return m;
}

bool Marker::fits(const SensorGeometry& geometry) const {
  return std::all_of(contour.begin(), contour.end(), [&](const ContourPoint& c) {
    const Eigen::Vector2d p = pose + c.offset;
    return geometry.contains(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())));
  });
}

double NoiseModel::rate_at(TimeUs t) const noexcept {
  double scale = 1.0;
  for (const auto& b : flicker_schedule) {
    if (t < b.t_start || t >= b.t_end) continue;
    const double phase = static_cast<double>(t - b.t_start) / static_cast<double>(b.t_end - b.t_start);
    const double s = std::sin(std::numbers::pi * phase);
    scale += (b.multiplier - 1.0) * s * s;
  }
  return base_rate * std::max(0.0, scale);
}

void NoiseModel::validate() const {
  if (!(base_rate >= 0.0)) throw std::invalid_argument("noise base_rate must be nonnegative");
  for (const auto& b : flicker_schedule) {
    if (b.t_end <= b.t_start) throw std::invalid_argument("flicker burst must have t_end > t_start");
    if (!(b.multiplier >= 0.0)) throw std::invalid_argument("flicker multiplier must be nonnegative");
  }
  if (!(vibration.amplitude_px >= 0.0 && vibration.frequency_hz >= 0.0))
    throw std::invalid_argument("vibration amplitude and frequency must be nonnegative");
}

EventEmulator::EventEmulator(SensorGeometry geometry, Marker marker, NoiseModel noise,
                             TimeUs latency_us)
    : geometry_(geometry),
      marker_(std::move(marker)),
      noise_(std::move(noise)),
      latency_us_(latency_us),
      rng_(noise_.rng_seed) {
  geometry_.validate();
  noise_.validate();
  if (latency_us_ < 0) throw std::invalid_argument("sensor latency must be nonnegative");
  applied_pose_ = marker_.pose + jitter(0);
  pixels_.reserve(marker_.contour.size());
  for (const auto& c : marker_.contour) {
    const Eigen::Vector2d p = applied_pose_ + c.offset;
    pixels_.emplace_back(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())));
  }
}

Eigen::Vector2d EventEmulator::jitter(TimeUs t) const {
  const auto& v = noise_.vibration;
  if (v.amplitude_px == 0.0 || v.frequency_hz == 0.0) return Eigen::Vector2d::Zero();
  const double s = std::sin(2.0 * std::numbers::pi * v.frequency_hz * static_cast<double>(t) * 1e-6);
  return Eigen::Vector2d(0.0, v.amplitude_px * s);
}

std::vector<Eigen::Vector2d> EventEmulator::corner_positions() const {
  std::vector<Eigen::Vector2d> out;
  for (const auto& v : marker_.vertices) out.push_back(marker_.pose + v);
  return out;
}

void EventEmulator::advance(TimeUs t0, TimeUs t1, const Eigen::Vector2d& pose_next,
                            std::vector<Event>& out, bool with_noise) {
  if (t1 <= t0) throw std::invalid_argument("emulator interval must be non-empty");
  const Eigen::Vector2d start = marker_.pose;
  const TimeUs span = t1 - t0;
  for (TimeUs a = t0; a < t1;) {
    const TimeUs b = std::min(t1, a + kEmulatorTickUs);
    const double f = static_cast<double>(b - t0) / static_cast<double>(span);
    tick(a, b, start + (pose_next - start) * f, out, with_noise);
    a = b;
  }
}

void EventEmulator::tick(TimeUs t0, TimeUs t1, const Eigen::Vector2d& pose_next,
                         std::vector<Event>& out, bool with_noise) {
  scratch_.clear();
  const TimeUs span = t1 - t0;
  const Eigen::Vector2d applied = pose_next + jitter(t1);
  const Eigen::Vector2d delta = applied - applied_pose_;

  if (delta.x() != 0.0 || delta.y() != 0.0) {
    const int pol = std::abs(delta.y()) >= std::abs(delta.x()) ? (delta.y() > 0.0 ? 1 : -1)
                                                              : (delta.x() > 0.0 ? 1 : -1);
    for (std::size_t i = 0; i < marker_.contour.size(); ++i) {
      const Eigen::Vector2d p = applied + marker_.contour[i].offset;
      const Eigen::Vector2i px(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())));
      if (px == pixels_[i]) continue;
      const Eigen::Vector2d q = applied_pose_ + marker_.contour[i].offset;
      double frac = 0.0;
      for (int axis = 0; axis < 2; ++axis) {
        if (px(axis) == pixels_[i](axis)) continue;
        const double boundary = px(axis) > pixels_[i](axis) ? std::floor(q(axis)) + 1.0 : std::floor(q(axis));
        frac = std::max(frac, (boundary - q(axis)) / (p(axis) - q(axis)));
      }
      pixels_[i] = px;
      if (!geometry_.contains(px.x(), px.y())) continue;
      const TimeUs dt = std::clamp<TimeUs>(static_cast<TimeUs>(std::llround(frac * span)), 1, span);
      scratch_.push_back({t0 + dt, px.x(), px.y(), pol});
    }
  }
  applied_pose_ = applied;
  marker_.pose = pose_next;

  if (with_noise) {
    const double mean = noise_.rate_at(t0 + span / 2) * static_cast<double>(span) * 1e-6;
    if (mean > 0.0) {
      std::poisson_distribution<int> count(mean);
      std::uniform_int_distribution<TimeUs> when(1, span);
      std::uniform_int_distribution<int> col(0, geometry_.width - 1);
      std::uniform_int_distribution<int> row(0, geometry_.height - 1);
      std::bernoulli_distribution positive(0.5);
      const int n = count(rng_);
      for (int k = 0; k < n; ++k) {
        const TimeUs t = t0 + when(rng_);
        const int x = col(rng_);
        const int y = row(rng_);
        scratch_.push_back({t, x, y, positive(rng_) ? 1 : -1});
      }
    }
  }

  std::stable_sort(scratch_.begin(), scratch_.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  for (Event e : scratch_) {
    e.t += latency_us_;
    out.push_back(e);
  }
}

std::vector<Event> synthesize_events(const Marker& marker, const Eigen::Vector2d& pose_prev,
                                     const Eigen::Vector2d& pose_next, const NoiseModel& noise,
                                     TimeUs t0, TimeUs t1, const SensorGeometry& geometry) {
  if (t1 - t0 < kEmulatorTickUs)
    throw std::invalid_argument("interval must span at least one emulator tick");
  Marker start = marker;
  start.pose = pose_prev;
  EventEmulator emu(geometry, std::move(start), noise);
  std::vector<Event> out;
  emu.advance(t0, t1, pose_next, out);
  return out;
}

}  // namespace evslip
