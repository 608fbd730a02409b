#include "evslip/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace evslip {

using nlohmann::json;

Marker MarkerSpec::build() const {
  const Eigen::Vector2d pose(x_px, y_px);
  switch (shape) {
    case MarkerShape::Square:
      return Marker::square(width_px, tilt_rad, pose);
    case MarkerShape::Rectangle:
      return Marker::rectangle(width_px, height_px, tilt_rad, pose);
    case MarkerShape::Circle:
      return Marker::circle(0.5 * width_px, pose);
  }
  return Marker::square(width_px, tilt_rad, pose);
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ScenarioError(what);
}

}  // namespace

void Scenario::validate() const {
  try {
    geometry.validate();
    noise.validate();
    actuator.validate();
    detector.validate();
    harris.validate();
    fuzzy.validate();
  } catch (const std::exception& e) {
    throw ScenarioError(e.what());
  }
  require(mm_per_px > 0.0, "mm_per_px must be positive");
  require(sensor_latency_us >= 0, "sensor latency must be nonnegative");
  require(plant.object_mass > 0.0, "object mass must be positive");
  require(plant.load_mass >= 0.0, "load mass must be nonnegative");
  require(plant.mu > 0.0, "friction coefficient must be positive");
  require(plant.newtons_per_percent > 0.0, "newtons_per_percent must be positive");
  require(marker.width_px > 0.0 && marker.height_px > 0.0, "marker dimensions must be positive");
  require(marker.build().fits(geometry), "marker does not fit the sensor at its initial pose");

  const auto& tl = timeline;
  require(tl.sampling_start >= 0, "sampling must start at t >= 0");
  require(tl.grasp_time > tl.sampling_start, "grasp must follow the sampling start");
  require(tl.grasp_time - tl.sampling_start >= detector.dt_us, "sampling shorter than one window");
  require(tl.settle_us >= 0, "settle time must be nonnegative");
  require(tl.lift_time >= tl.grasp_time + tl.settle_us, "lift must follow the settle period");
  require(tl.end_time > tl.lift_time, "end must follow the lift");
  if (tl.place_time) {
    require(*tl.place_time > tl.lift_time && *tl.place_time <= tl.end_time,
            "place time must lie between lift and end");
  }
  for (const auto& m : arm_motions) {
    require(m.t_end > m.t_start, "arm motion must have t_end > t_start");
    require(std::isfinite(m.accel), "arm acceleration must be finite");
  }
  for (const auto& l : loads) {
    require(l.mass > 0.0, "load mass must be positive");
    require(l.height_min_m >= 0.0 && l.height_max_m >= l.height_min_m, "invalid load drop heights");
    require(l.coupling >= 0.0 && l.coupling <= 1.0, "load coupling must lie in [0, 1]");
    require(l.time_jitter_us >= 0, "load time jitter must be nonnegative");
    require(l.t - l.time_jitter_us >= tl.grasp_time + tl.settle_us && l.t + l.time_jitter_us < tl.end_time,
            "load drop must fall inside the monitoring stage");
  }
  require(frame_us >= detector.dt_us, "slip-metric frame shorter than one window");
  require(frame_radius_px > 0.0, "frame radius must be positive");
  require(tl.grasp_time + tl.settle_us + frame_us <= tl.end_time - frame_us,
          "slip-metric frames overlap");
}

// ---- JSON ----------------------------------------------------------------

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ScenarioError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ScenarioError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void get(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

json mfs_to_json(const InputMFs& mfs) {
  json a = json::array();
  for (const auto& m : mfs) a.push_back({m.a, m.b, m.c});
  return a;
}

InputMFs mfs_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ScenarioError("input MFs: expected three triangles");
  InputMFs out;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto v = j[i].get<std::vector<double>>();
    if (v.size() != 3) throw ScenarioError("input MFs: expected [a, b, c]");
    out[i] = {v[0], v[1], v[2]};
  }
  return out;
}

json fuzzy_to_json(const FuzzyConfig& f) {
  json forces = json::array();
  for (const auto& m : f.force_mfs) forces.push_back({m.mean, m.sigma});
  json rules = json::array();
  for (const auto& row : f.rules) {
    json r = json::array();
    for (ForceLabel l : row) r.push_back(std::string(to_string(l)));
    rules.push_back(r);
  }
  return {{"edge_mfs", mfs_to_json(f.edge_mfs)},
          {"corner_mfs", mfs_to_json(f.corner_mfs)},
          {"force_mfs", forces},
          {"rules", rules},
          {"g_min", f.g_min},
          {"g_max", f.g_max},
          {"cog_resolution", f.cog_resolution}};
}

FuzzyConfig fuzzy_from_json(const json& j, FuzzyConfig f) {
  check_keys(j, {"edge_mfs", "corner_mfs", "force_mfs", "rules", "g_min", "g_max", "cog_resolution"},
             "fuzzy");
  if (j.contains("edge_mfs")) f.edge_mfs = mfs_from_json(j["edge_mfs"]);
  if (j.contains("corner_mfs")) f.corner_mfs = mfs_from_json(j["corner_mfs"]);
  if (j.contains("force_mfs")) {
    const auto& a = j["force_mfs"];
    if (!a.is_array() || a.size() != 5) throw ScenarioError("force_mfs: expected five Gaussians");
    for (std::size_t i = 0; i < 5; ++i) {
      const auto v = a[i].get<std::vector<double>>();
      if (v.size() != 2) throw ScenarioError("force_mfs: expected [mean, sigma]");
      f.force_mfs[i] = {v[0], v[1]};
    }
  }
  if (j.contains("rules")) {
    const auto& a = j["rules"];
    if (!a.is_array() || a.size() != 3) throw ScenarioError("rules: expected a 3x3 table");
    for (std::size_t r = 0; r < 3; ++r) {
      if (!a[r].is_array() || a[r].size() != 3) throw ScenarioError("rules: expected a 3x3 table");
      for (std::size_t c = 0; c < 3; ++c) {
        const auto label = force_label_from_string(a[r][c].get<std::string>());
        if (!label) throw ScenarioError("rules: unknown force label '" + a[r][c].get<std::string>() + "'");
        f.rules[r][c] = *label;
      }
    }
  }
  get(j, "g_min", f.g_min);
  get(j, "g_max", f.g_max);
  get(j, "cog_resolution", f.cog_resolution);
  return f;
}

json to_json_impl(const Scenario& s) {
  json flicker = json::array();
  for (const auto& b : s.noise.flicker_schedule) flicker.push_back({b.t_start, b.t_end, b.multiplier});
  json motions = json::array();
  for (const auto& m : s.arm_motions)
    motions.push_back({{"t_start", m.t_start}, {"t_end", m.t_end}, {"accel", m.accel}});
  json loads = json::array();
  for (const auto& l : s.loads) {
    loads.push_back({{"t", l.t},
                     {"mass", l.mass},
                     {"height_min_m", l.height_min_m},
                     {"height_max_m", l.height_max_m},
                     {"coupling", l.coupling},
                     {"time_jitter_us", l.time_jitter_us}});
  }
  json timeline = {{"sampling_start", s.timeline.sampling_start},
                   {"grasp_time", s.timeline.grasp_time},
                   {"settle_us", s.timeline.settle_us},
                   {"lift_time", s.timeline.lift_time},
                   {"end_time", s.timeline.end_time}};
  timeline["place_time"] = s.timeline.place_time ? json(*s.timeline.place_time) : json(nullptr);
  return {
      {"name", s.name},
      {"seed", s.seed},
      {"sensor", {{"width", s.geometry.width}, {"height", s.geometry.height}}},
      {"mm_per_px", s.mm_per_px},
      {"sensor_latency_us", s.sensor_latency_us},
      {"marker",
       {{"shape", std::string(to_string(s.marker.shape))},
        {"width_px", s.marker.width_px},
        {"height_px", s.marker.height_px},
        {"tilt_rad", s.marker.tilt_rad},
        {"x_px", s.marker.x_px},
        {"y_px", s.marker.y_px}}},
      {"noise",
       {{"base_rate", s.noise.base_rate},
        {"flicker", flicker},
        {"vibration_amplitude_px", s.noise.vibration.amplitude_px},
        {"vibration_frequency_hz", s.noise.vibration.frequency_hz}}},
      {"plant",
       {{"object_mass", s.plant.object_mass},
        {"load_mass", s.plant.load_mass},
        {"mu", s.plant.mu},
        {"newtons_per_percent", s.plant.newtons_per_percent}}},
      {"actuator",
       {{"time_constant_s", s.actuator.time_constant_s},
        {"delay_s", s.actuator.delay_s},
        {"overshoot", s.actuator.overshoot}}},
      {"timeline", timeline},
      {"arm_motions", motions},
      {"loads", loads},
      {"detector",
       {{"dt_us", s.detector.dt_us},
        {"s_bias", s.detector.s_bias},
        {"episode_gap_us", s.detector.episode_gap_us}}},
      {"harris",
       {{"patch_side", s.harris.patch_side},
        {"n_latest", s.harris.n_latest},
        {"corner_threshold", s.harris.corner_threshold},
        {"edge_threshold", s.harris.edge_threshold},
        {"harris_k", s.harris.harris_k},
        {"gaussian_sigma", s.harris.gaussian_sigma}}},
      {"fuzzy", fuzzy_to_json(s.fuzzy)},
      {"suppression_enabled", s.suppression_enabled},
      {"frame_us", s.frame_us},
      {"frame_radius_px", s.frame_radius_px},
  };
}

Scenario from_json_impl(const json& j) {
  check_keys(j,
             {"name", "seed", "sensor", "mm_per_px", "sensor_latency_us", "marker", "noise", "plant",
              "actuator", "timeline", "arm_motions", "loads", "detector", "harris", "fuzzy",
              "suppression_enabled", "frame_us", "frame_radius_px"},
             "scenario");
  Scenario s;
  get(j, "name", s.name);
  get(j, "seed", s.seed);
  get(j, "mm_per_px", s.mm_per_px);
  get(j, "sensor_latency_us", s.sensor_latency_us);
  get(j, "suppression_enabled", s.suppression_enabled);
  get(j, "frame_us", s.frame_us);
  get(j, "frame_radius_px", s.frame_radius_px);
  if (j.contains("sensor")) {
    const auto& o = j["sensor"];
    check_keys(o, {"width", "height"}, "sensor");
    get(o, "width", s.geometry.width);
    get(o, "height", s.geometry.height);
  }
  if (j.contains("marker")) {
    const auto& o = j["marker"];
    check_keys(o, {"shape", "width_px", "height_px", "tilt_rad", "x_px", "y_px"}, "marker");
    if (o.contains("shape")) {
      try {
        s.marker.shape = marker_shape_from_string(o["shape"].get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
      }
    }
    get(o, "width_px", s.marker.width_px);
    s.marker.height_px = s.marker.width_px;
    get(o, "height_px", s.marker.height_px);
    get(o, "tilt_rad", s.marker.tilt_rad);
    get(o, "x_px", s.marker.x_px);
    get(o, "y_px", s.marker.y_px);
  }
  if (j.contains("noise")) {
    const auto& o = j["noise"];
    check_keys(o, {"base_rate", "flicker", "vibration_amplitude_px", "vibration_frequency_hz"}, "noise");
    get(o, "base_rate", s.noise.base_rate);
    get(o, "vibration_amplitude_px", s.noise.vibration.amplitude_px);
    get(o, "vibration_frequency_hz", s.noise.vibration.frequency_hz);
    if (o.contains("flicker")) {
      for (const auto& b : o["flicker"]) {
        if (!b.is_array() || b.size() != 3)
          throw ScenarioError("flicker: expected [t_start, t_end, multiplier]");
        s.noise.flicker_schedule.push_back({b[0].get<TimeUs>(), b[1].get<TimeUs>(), b[2].get<double>()});
      }
    }
  }
  if (j.contains("plant")) {
    const auto& o = j["plant"];
    check_keys(o, {"object_mass", "load_mass", "mu", "newtons_per_percent"}, "plant");
    get(o, "object_mass", s.plant.object_mass);
    get(o, "load_mass", s.plant.load_mass);
    get(o, "mu", s.plant.mu);
    get(o, "newtons_per_percent", s.plant.newtons_per_percent);
  }
  if (j.contains("actuator")) {
    const auto& o = j["actuator"];
    check_keys(o, {"time_constant_s", "delay_s", "overshoot"}, "actuator");
    get(o, "time_constant_s", s.actuator.time_constant_s);
    get(o, "delay_s", s.actuator.delay_s);
    get(o, "overshoot", s.actuator.overshoot);
  }
  if (j.contains("timeline")) {
    const auto& o = j["timeline"];
    check_keys(o, {"sampling_start", "grasp_time", "settle_us", "lift_time", "place_time", "end_time"},
               "timeline");
    get(o, "sampling_start", s.timeline.sampling_start);
    get(o, "grasp_time", s.timeline.grasp_time);
    get(o, "settle_us", s.timeline.settle_us);
    get(o, "lift_time", s.timeline.lift_time);
    get(o, "end_time", s.timeline.end_time);
    if (o.contains("place_time") && !o["place_time"].is_null())
      s.timeline.place_time = o["place_time"].get<TimeUs>();
  }
  if (j.contains("arm_motions")) {
    for (const auto& o : j["arm_motions"]) {
      check_keys(o, {"t_start", "t_end", "accel"}, "arm_motions");
      ArmMotion m;
      get(o, "t_start", m.t_start);
      get(o, "t_end", m.t_end);
      get(o, "accel", m.accel);
      s.arm_motions.push_back(m);
    }
  }
  if (j.contains("loads")) {
    for (const auto& o : j["loads"]) {
      check_keys(o, {"t", "mass", "height_min_m", "height_max_m", "coupling", "time_jitter_us"}, "loads");
      LoadDrop l;
      get(o, "t", l.t);
      get(o, "mass", l.mass);
      get(o, "height_min_m", l.height_min_m);
      get(o, "height_max_m", l.height_max_m);
      get(o, "coupling", l.coupling);
      get(o, "time_jitter_us", l.time_jitter_us);
      s.loads.push_back(l);
    }
  }
  if (j.contains("detector")) {
    const auto& o = j["detector"];
    check_keys(o, {"dt_us", "s_bias", "episode_gap_us"}, "detector");
    get(o, "dt_us", s.detector.dt_us);
    get(o, "s_bias", s.detector.s_bias);
    get(o, "episode_gap_us", s.detector.episode_gap_us);
  }
  if (j.contains("harris")) {
    const auto& o = j["harris"];
    check_keys(o,
               {"patch_side", "n_latest", "corner_threshold", "edge_threshold", "harris_k",
                "gaussian_sigma"},
               "harris");
    get(o, "patch_side", s.harris.patch_side);
    get(o, "n_latest", s.harris.n_latest);
    get(o, "corner_threshold", s.harris.corner_threshold);
    get(o, "edge_threshold", s.harris.edge_threshold);
    get(o, "harris_k", s.harris.harris_k);
    get(o, "gaussian_sigma", s.harris.gaussian_sigma);
  }
  if (j.contains("fuzzy")) s.fuzzy = fuzzy_from_json(j["fuzzy"], s.fuzzy);
  return s;
}

}  // namespace

Scenario parse_scenario(std::string_view json_text) {
  Scenario s;
  try {
    s = from_json_impl(json::parse(json_text));
  } catch (const json::parse_error& e) {
    throw ScenarioSyntaxError(std::string("scenario JSON: ") + e.what());
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario JSON: ") + e.what());
  }
  s.validate();
  return s;
}

std::string dump_scenario(const Scenario& s) { return to_json_impl(s).dump(2) + "\n"; }

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

// ---- bundled scenarios ---------------------------------------------------

FuzzyConfig calibrated_fuzzy_config() {
  FuzzyConfig f = FuzzyConfig::with_ranges(0.0, 30.0, 0.0, 24.0);
  f.g_min = 30.0;
  return f;
}

namespace {

Scenario base_scenario(std::uint64_t seed) {
  Scenario s;
  s.seed = seed;
  s.noise.base_rate = 10'000.0;
  s.noise.vibration = {0.6, 30.0};
  s.fuzzy = calibrated_fuzzy_config();
  s.timeline.sampling_start = 100'000;
  s.timeline.grasp_time = 2'100'000;
  s.timeline.settle_us = 100'000;
  s.timeline.lift_time = 2'300'000;
  s.timeline.end_time = 3'600'000;
  s.arm_motions = {{2'300'000, 2'500'000, 3.0}, {2'500'000, 2'700'000, -3.0}};
  return s;
}

LoadDrop load(TimeUs t, double mass) {
  LoadDrop l;
  l.t = t;
  l.mass = mass;
  return l;
}

std::vector<FlickerBurst> monitoring_flicker() {
  return {{2'750'000, 3'250'000, 2.0}};
}

}  // namespace

std::vector<std::string> bundled_scenario_names() {
  return {"calm",         "load_drop_light",   "load_drop_heavy", "load_drop",
          "flicker_noise", "flicker_load",     "full_manipulation",
          "full_manipulation_flicker"};
}

Scenario bundled_scenario(const std::string& name, std::uint64_t seed) {
  Scenario s = base_scenario(seed);
  s.name = name;
  if (name == "calm") {
  } else if (name == "load_drop_light") {
    s.loads = {load(3'000'000, 0.08)};
  } else if (name == "load_drop_heavy" || name == "load_drop") {
    s.loads = {load(3'000'000, 0.20)};
  } else if (name == "flicker_noise") {
    s.noise.flicker_schedule = monitoring_flicker();
  } else if (name == "flicker_load") {
    s.noise.flicker_schedule = monitoring_flicker();
    s.loads = {load(3'400'000, 0.20)};
    s.timeline.end_time = 4'000'000;
  } else if (name == "full_manipulation" || name == "full_manipulation_flicker") {
    s.timeline.end_time = 5'000'000;
    s.timeline.place_time = 4'600'000;
    s.arm_motions = {{2'300'000, 2'500'000, 3.0},
                     {2'500'000, 2'700'000, -3.0},
                     {3'600'000, 3'800'000, -3.0},
                     {3'800'000, 4'000'000, 3.0}};
    s.loads = {load(3'100'000, 0.20)};
    if (name == "full_manipulation_flicker") s.noise.flicker_schedule = {{2'700'000, 3'000'000, 1.6},
                                                                          {3'900'000, 4'400'000, 1.6}};
  } else {
    throw ScenarioError("unknown scenario '" + name + "'");
  }
  s.validate();
  return s;
}

}  // namespace evslip
