#include "evslip/closed_loop.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "evslip/harris.hpp"
#include "evslip/windows.hpp"

namespace evslip {

std::size_t EventFrame::corner_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const LabeledEvent& e) {
    return e.label == FeatureClass::Corner;
  }));
}

Eigen::Vector2d EventFrame::corner_centroid() const {
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  std::size_t n = 0;
  for (const auto& e : events) {
    if (e.label != FeatureClass::Corner) continue;
    sum += Eigen::Vector2d(e.event.x, e.event.y);
    ++n;
  }
  if (n == 0) {
    throw NoCorners("frame [" + std::to_string(t_begin) + ", " + std::to_string(t_end) +
                    ") has no corner events");
  }
  return sum / static_cast<double>(n);
}

EventFrame focus_frame(const EventFrame& frame, double radius) {
  std::vector<Eigen::Vector2d> corners;
  for (const auto& e : frame.events) {
    if (e.label == FeatureClass::Corner) corners.emplace_back(e.event.x, e.event.y);
  }
  if (corners.empty()) return frame;
  const double r2 = radius * radius;

  std::size_t best = 0;
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    std::size_t count = 0;
    for (const auto& q : corners) count += (q - corners[i]).squaredNorm() <= r2;
    if (count > best_count) {
      best_count = count;
      best = i;
    }
  }
  Eigen::Vector2d centre = corners[best];
  for (int iter = 0; iter < 10; ++iter) {
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    std::size_t n = 0;
    for (const auto& q : corners) {
      if ((q - centre).squaredNorm() > r2) continue;
      sum += q;
      ++n;
    }
    const Eigen::Vector2d next = sum / static_cast<double>(n);
    if ((next - centre).squaredNorm() < 1e-12) break;
    centre = next;
  }

  EventFrame out{frame.t_begin, frame.t_end, {}};
  for (const auto& e : frame.events) {
    if ((Eigen::Vector2d(e.event.x, e.event.y) - centre).squaredNorm() <= r2) out.events.push_back(e);
  }
  return out;
}

double slip_metric(const EventFrame& a, const EventFrame& b, double mm_per_px) {
  if (!(mm_per_px > 0.0)) throw std::invalid_argument("mm_per_px must be positive");
  return (a.corner_centroid() - b.corner_centroid()).norm() * mm_per_px;
}

namespace {

struct ScheduledLoad {
  TimeUs t;
  double mass;
  double impact_velocity;
};

std::vector<ScheduledLoad> schedule_loads(const Scenario& s) {
  std::mt19937_64 rng(s.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<ScheduledLoad> out;
  for (const auto& l : s.loads) {
    TimeUs t = l.t;
    if (l.time_jitter_us > 0) t += std::uniform_int_distribution<TimeUs>(-l.time_jitter_us, l.time_jitter_us)(rng);
    const double h = l.height_max_m > l.height_min_m
                         ? std::uniform_real_distribution<double>(l.height_min_m, l.height_max_m)(rng)
                         : l.height_min_m;
    out.push_back({t, l.mass, l.coupling * std::sqrt(2.0 * 9.81 * h)});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  return out;
}

double arm_accel_at(const Scenario& s, TimeUs t) {
  double a = 0.0;
  for (const auto& m : s.arm_motions) {
    if (t >= m.t_start && t < m.t_end) a += m.accel;
  }
  return a;
}

void summarize(ApproachSummary& sum, const std::vector<SlipInterval>& intervals, const DetectorConfig& cfg,
               double mm_per_px) {
  const TimeUs tol = kMatchToleranceWindows * cfg.dt_us;
  auto matches = [&](const SlipEvent& f, const SlipInterval& iv) {
    const TimeUs w_start = f.t_detect - cfg.dt_us;
    return w_start < iv.t_end + tol && f.t_detect > iv.t_start;
  };
  const auto episodes = extract_incipient(sum.flags, cfg);
  sum.episodes = episodes.size();
  sum.intervals.assign(intervals.size(), IntervalMatch{});
  for (const auto& ep : episodes) {
    bool any_true = false;
    for (const auto& f : ep.windows) {
      bool is_true = false;
      for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (!matches(f, intervals[i])) continue;
        is_true = true;
        auto& m = sum.intervals[i];
        if (!m.detected) {
          m.detected = true;
          m.latency_us = f.t_detect - intervals[i].t_start;
          m.first_kind = f.kind;
        }
      }
      if (!is_true) ++sum.false_flags;
      any_true = any_true || is_true;
    }
    if (!any_true) ++sum.false_episodes;
  }
  // Flags carry their episode kind.
  std::vector<SlipEvent> relabeled;
  for (const auto& ep : episodes) relabeled.insert(relabeled.end(), ep.windows.begin(), ep.windows.end());
  sum.flags = std::move(relabeled);

  bool all_detected = true;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].monitored && intervals[i].observable(mm_per_px) && !sum.intervals[i].detected)
      all_detected = false;
  }
  sum.success = all_detected && sum.false_episodes == 0;
}

}  // namespace

SimulationOutput run_closed_loop(const Scenario& scenario, const RunOptions& options) {
  scenario.validate();
  const Scenario& s = scenario;
  const auto& tl = s.timeline;
  const TimeUs monitor_start = tl.grasp_time + tl.settle_us;
  const TimeUs dt = s.detector.dt_us;
  const double px_per_m = 1e3 / s.mm_per_px;

  SimulationOutput out;
  SimulationReport& rep = out.report;
  rep.scenario = s.name;
  rep.seed = s.seed;
  rep.dt_us = dt;
  rep.s_bias = s.detector.s_bias;
  rep.baseline.approach = Approach::Baseline;
  rep.feature.approach = Approach::Feature;

  NoiseModel noise = s.noise;
  noise.rng_seed = s.seed;
  const Marker marker = s.marker.build();
  const Eigen::Vector2d pose0 = marker.pose;
  EventEmulator emulator(s.geometry, marker, noise, s.sensor_latency_us);
  EventLabeler labeler(s.geometry, s.harris);
  WindowAccumulator windows(dt);
  StageController stages(s.detector);
  SuppressionController suppression(s.fuzzy);

  PlantState plant = s.plant;
  plant.y_pos = 0.0;
  plant.y_vel = 0.0;
  plant.slipping = false;
  plant.grip_percent = 0.0;
  GripActuator actuator(s.actuator, 0.0);
  const auto loads = schedule_loads(s);
  std::size_t next_load = 0;
  bool grasp_commanded = false;

  EventFrame frame_start{monitor_start, monitor_start + s.frame_us, {}};
  EventFrame frame_end{tl.end_time - s.frame_us, tl.end_time, {}};

  std::optional<SlipInterval> open_interval;
  double interval_y0 = 0.0;
  TimeUs now = 0;

  auto on_window = [&](const WindowCounts& w) {
    WindowRecord rec{w, stages.state().stage, false, false};
    const TimeUs w_end = w.t_start + dt;
    if (w.t_start < tl.sampling_start) {
      if (options.record_windows) out.windows.push_back(rec);
      return;
    }
    if (w_end > tl.grasp_time && stages.state().stage == Stage::Sampling) stages.begin_grasp(s.fuzzy.g_min);
    if (w.t_start >= monitor_start && stages.state().stage == Stage::Grasping) stages.begin_monitoring();
    rec.stage = stages.state().stage;
    if (rec.stage == Stage::Monitoring) ++rep.monitored_windows;
    for (const SlipEvent& f : stages.feed(w)) {
      if (f.approach == Approach::Baseline) {
        rec.baseline_flag = true;
        rep.baseline.flags.push_back(f);
        continue;
      }
      rec.feature_flag = true;
      rep.feature.flags.push_back(f);
      if (s.suppression_enabled && f.kind == SlipKind::Incipient) {
        if (auto cmd = suppression.step(f.s_e, f.s_c)) {
          actuator.command(now, cmd->percent);
          rep.commands.push_back({now, cmd->percent, cmd->estimate});
        }
      }
    }
    if (options.record_windows) out.windows.push_back(rec);
  };

  std::vector<Event> batch;
  const double step_s = static_cast<double>(kEmulatorTickUs) * 1e-6;
  for (TimeUs t = 0; t < tl.end_time; t += kEmulatorTickUs) {
    now = t;
    if (!grasp_commanded && t >= tl.grasp_time) {
      actuator.command(t, s.fuzzy.g_min);
      grasp_commanded = true;
    }
    while (next_load < loads.size() && loads[next_load].t <= t) {
      plant = apply_load(plant, loads[next_load].mass, loads[next_load].impact_velocity);
      ++next_load;
    }
    const TimeUs t1 = t + kEmulatorTickUs;
    plant.grip_percent = actuator.update(t1, step_s);
    PlantInputs in;
    in.arm_accel = arm_accel_at(s, t);
    in.supported = t < tl.lift_time || (tl.place_time && t >= *tl.place_time);
    const bool was_slipping = plant.slipping;
    const double y_before = plant.y_pos;
    plant = step_plant(plant, step_s, in);

    if (plant.slipping && !open_interval) {
      open_interval = SlipInterval{t, t1, 0.0, t >= monitor_start};
      interval_y0 = y_before;
    }
    if (!plant.slipping && open_interval) {
      open_interval->t_end = t1;
      open_interval->displacement_mm = (plant.y_pos - interval_y0) * 1e3;
      rep.slip_intervals.push_back(*open_interval);
      open_interval.reset();
    }
    if (options.record_ground_truth && (t1 % dt == 0 || plant.slipping != was_slipping))
      out.ground_truth.push_back({t1, plant.slipping, plant.y_pos});
    if (options.force_trace_every_us > 0 && t1 % options.force_trace_every_us == 0)
      out.force.push_back({t1, actuator.setpoint(), plant.grip_percent, plant.normal_force()});

    batch.clear();
    const Eigen::Vector2d pose = pose0 + Eigen::Vector2d(0.0, plant.y_pos * px_per_m);
    emulator.advance(t, t1, pose, batch);
    now = t1;
    for (const Event& e : batch) {
      const LabeledEvent le = labeler.process(e);
      ++rep.total_events;
      if (le.label == FeatureClass::Corner) ++rep.corner_events;
      else if (le.label == FeatureClass::Edge) ++rep.edge_events;
      if (e.t >= frame_start.t_begin && e.t < frame_start.t_end) frame_start.events.push_back(le);
      if (e.t >= frame_end.t_begin && e.t < frame_end.t_end) frame_end.events.push_back(le);
      windows.push(le, on_window);
    }
    if (options.record_events) out.events.insert(out.events.end(), batch.begin(), batch.end());
    windows.advance_to(t1 + s.sensor_latency_us, on_window);
  }
  if (open_interval) {
    open_interval->t_end = tl.end_time;
    open_interval->displacement_mm = (plant.y_pos - interval_y0) * 1e3;
    rep.slip_intervals.push_back(*open_interval);
  }

  if (const auto& th = stages.state().thresholds) rep.thresholds = *th;
  rep.sampled_windows = stages.sampled_windows();
  rep.fuzzy_trace = suppression.trace();
  summarize(rep.baseline, rep.slip_intervals, s.detector, s.mm_per_px);
  summarize(rep.feature, rep.slip_intervals, s.detector, s.mm_per_px);

  rep.final_slipping = plant.slipping;
  rep.final_y_mm = plant.y_pos * 1e3;
  try {
    rep.q_sm_mm = slip_metric(focus_frame(frame_start, s.frame_radius_px),
                              focus_frame(frame_end, s.frame_radius_px), s.mm_per_px);
  } catch (const NoCorners& e) {
    rep.q_sm_error = e.what();
  }

  bool monitored_slip = false;
  bool commanded_after = false;
  for (const auto& iv : rep.slip_intervals) {
    if (!iv.monitored) continue;
    monitored_slip = true;
    for (const auto& c : rep.commands) commanded_after = commanded_after || c.t >= iv.t_start;
  }
  rep.suppressed = monitored_slip && commanded_after && !rep.final_slipping;
  return out;
}

}  // namespace evslip
