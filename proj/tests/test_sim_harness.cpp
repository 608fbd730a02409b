#include <doctest.h>

#include <cmath>

#include "evslip/closed_loop.hpp"
#include "evslip/emulator.hpp"
#include "evslip/plant.hpp"
#include "evslip/scenario.hpp"
#include "oracles.hpp"

using namespace evslip;

namespace {

LabeledEvent corner_at(TimeUs t, int x, int y) { return {{t, x, y, 1}, FeatureClass::Corner, 20.0}; }

}  // namespace

TEST_SUITE("sim_harness") {

TEST_CASE("plant holds while friction covers the weight") {
  PlantState s;
  s.grip_percent = 30.0;  // capacity 2 * 0.5 * 6 N = 6 N against 2.94 N
  for (int i = 0; i < 1000; ++i) s = step_plant(s, 1e-4);
  CHECK(s.y_pos == 0.0);
  CHECK_FALSE(s.slipping);
  CHECK(s.friction_capacity() == doctest::Approx(6.0));
}

TEST_CASE("unsupported weight falls at the net acceleration") {
  PlantState s;
  s.grip_percent = 5.0;  // capacity 1 N
  const double a = 9.81 - s.friction_capacity() / s.total_mass();
  const double dt = 5e-5;
  const int n = 2000;
  for (int i = 0; i < n; ++i) s = step_plant(s, dt);
  const double t = n * dt;
  CHECK(s.slipping);
  CHECK(s.y_vel == doctest::Approx(a * t).epsilon(1e-9));
  // Semi-implicit Euler leads the closed form by a dt t / 2.
  CHECK(std::abs(s.y_pos - oracle::slide_distance(0.0, a, t)) <= a * dt * t / 2 + 1e-12);
}

TEST_CASE("a sliding object decelerates and sticks") {
  PlantState s;
  s.grip_percent = 50.0;  // capacity 10 N
  s.y_vel = 0.3;
  const double a = 9.81 - s.friction_capacity() / s.total_mass();
  REQUIRE(a < 0.0);
  const double t_stop = -0.3 / a;
  const double dt = 5e-5;
  double t = 0.0;
  while (s.y_vel > 0.0 || t == 0.0) {
    s = step_plant(s, dt);
    t += dt;
    REQUIRE(t < 1.0);
  }
  CHECK_FALSE(s.slipping);
  CHECK(t == doctest::Approx(t_stop).epsilon(0.01));
  CHECK(std::abs(s.y_pos - oracle::slide_distance(0.3, a, t_stop)) < 0.3 * dt * 2);
  const PlantState held = step_plant(s, dt);
  CHECK(held.y_pos == s.y_pos);
}

TEST_CASE("support and arm acceleration") {
  PlantState s;
  s.grip_percent = 0.0;
  PlantInputs in;
  in.supported = true;
  CHECK(step_plant(s, 1e-3, in).y_pos == 0.0);
  s.grip_percent = 16.0;  // capacity 3.2 N vs 2.94 N at rest
  CHECK_FALSE(step_plant(s, 1e-3).slipping);
  in = {};
  in.arm_accel = 3.0;  // apparent weight 3.84 N
  CHECK(step_plant(s, 1e-3, in).slipping);
  CHECK_THROWS_AS(step_plant(s, 0.0), std::invalid_argument);
}

TEST_CASE("dropped load shares its momentum") {
  PlantState s;
  s = apply_load(s, 0.2, 1.0);
  CHECK(s.load_mass == 0.2);
  CHECK(s.y_vel == doctest::Approx(0.2 / 0.5));
  CHECK(s.slipping);
  CHECK_THROWS_AS(apply_load(s, -0.1, 1.0), std::invalid_argument);
}

TEST_CASE("actuator is a delayed first-order lag") {
  ActuatorParams p;
  GripActuator act(p, 10.0);
  act.command(0, 60.0);
  const double dt = 5e-5;
  TimeUs t = 0;
  double grip = 10.0;
  while (t < 1000) {
    t += 50;
    grip = act.update(t, dt);
    if (t < 1000) CHECK(grip == 10.0);
  }
  CHECK(act.setpoint() == 60.0);
  int n = 0;
  while (t < 1000 + 30'000) {
    t += 50;
    grip = act.update(t, dt);
    ++n;
  }
  // The lag starts on the step that applies the setpoint.
  CHECK(grip == doctest::Approx(60.0 - 50.0 * std::exp(-(n + 1) * dt / p.time_constant_s)).epsilon(1e-9));
  CHECK(grip == doctest::Approx(10.0 + 50.0 * (1.0 - std::exp(-1.0))).epsilon(2e-3));
}

TEST_CASE("still marker and no noise produce nothing") {
  NoiseModel quiet;
  quiet.base_rate = 0.0;
  const Marker m = Marker::square(40.0, 0.5, {120.3, 60.6});
  CHECK(synthesize_events(m, m.pose, m.pose, quiet, 0, 10'000).empty());
  CHECK_THROWS_AS(synthesize_events(m, m.pose, m.pose, quiet, 0, 10), std::invalid_argument);
}

TEST_CASE("one pixel shift fires each contour point once") {
  NoiseModel quiet;
  quiet.base_rate = 0.0;
  const Marker m = Marker::square(40.0, 0.5, {120.3, 60.6});
  const auto ev = synthesize_events(m, m.pose, m.pose + Eigen::Vector2d(1.0, 0.0), quiet, 0, 50);
  CHECK(ev.size() == m.contour.size());
  for (const auto& e : ev) {
    CHECK(e.pol == 1);
    CHECK(e.t >= 1);
    CHECK(e.t <= 50);
  }
  for (std::size_t i = 1; i < ev.size(); ++i) CHECK(ev[i - 1].t <= ev[i].t);
}

TEST_CASE("background rate stays within three sigma") {
  NoiseModel noise;
  noise.base_rate = 10'000.0;
  noise.rng_seed = 99;
  const Marker m = Marker::square(40.0, 0.5, {120.3, 60.6});
  const auto ev = synthesize_events(m, m.pose, m.pose, noise, 0, 1'000'000);
  CHECK(std::abs(double(ev.size()) - 10'000.0) < 300.0);
  std::vector<LabeledEvent> labeled;
  for (const auto& e : ev) labeled.push_back({e, FeatureClass::Flat, 0.0});
  std::int64_t total = 0;
  for (const auto& w : oracle::recount(labeled, 500, 2001)) total += w.raw;
  CHECK(total == std::int64_t(ev.size()));
}

TEST_CASE("flicker raises the rate mid-burst only") {
  NoiseModel n;
  n.base_rate = 1000.0;
  n.flicker_schedule = {{100, 300, 3.0}};
  CHECK(n.rate_at(50) == 1000.0);
  CHECK(n.rate_at(200) == doctest::Approx(3000.0));
  CHECK(n.rate_at(300) == 1000.0);
}

TEST_CASE("slip metric is the corner centroid distance") {
  EventFrame a{0, 100, {corner_at(1, 10, 10), corner_at(2, 12, 10)}};
  EventFrame b{200, 300, {corner_at(201, 13, 14), corner_at(202, 15, 14)}};
  CHECK(slip_metric(a, a, 0.05) == 0.0);
  CHECK(slip_metric(a, b, 1.0) == doctest::Approx(5.0));
  CHECK(slip_metric(a, b, 0.05) == doctest::Approx(0.25));
  EventFrame empty{0, 100, {{{1, 10, 10, 1}, FeatureClass::Edge, -1.0}}};
  CHECK_THROWS_AS(slip_metric(a, empty, 1.0), NoCorners);
}

TEST_CASE("frame focus drops far corner noise") {
  EventFrame f{0, 100, {}};
  for (int i = 0; i < 20; ++i) f.events.push_back(corner_at(i, 50 + i % 3, 50 + i % 4));
  f.events.push_back(corner_at(30, 200, 170));
  const EventFrame g = focus_frame(f, 30.0);
  CHECK(g.corner_count() == 20);
  CHECK(g.corner_centroid().x() < 60.0);
}

TEST_CASE("scenario json round trip") {
  for (const auto& name : bundled_scenario_names()) {
    const Scenario s = bundled_scenario(name, 7);
    const std::string text = dump_scenario(s);
    CHECK(dump_scenario(parse_scenario(text)) == text);
  }
}

TEST_CASE("scenario validation") {
  Scenario s = bundled_scenario("calm");
  s.plant.object_mass = -1.0;
  CHECK_THROWS_AS(s.validate(), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(R"({"plant": {"object_mass": -0.3}})"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(R"({"bogus": 1})"), ScenarioError);
  CHECK_THROWS_AS(bundled_scenario("nope"), ScenarioError);
  s = bundled_scenario("calm");
  s.timeline.grasp_time = s.timeline.sampling_start - 1;
  CHECK_THROWS_AS(s.validate(), ScenarioError);
}

TEST_CASE("calm run raises no alarm") {
  const auto out = run_closed_loop(bundled_scenario("calm", 3));
  const SimulationReport& r = out.report;
  CHECK(r.sampled_windows > 0);
  CHECK(r.monitored_windows > 0);
  CHECK(r.feature.false_flags == 0);
  CHECK(r.commands.empty());
  CHECK_FALSE(r.final_slipping);
  REQUIRE(r.q_sm_mm);
  CHECK(*r.q_sm_mm < 1.0);
}

TEST_CASE("load drop is detected and suppressed") {
  RunOptions opts;
  opts.record_ground_truth = true;
  const Scenario sc = bundled_scenario("load_drop_heavy", 3);
  const auto out = run_closed_loop(sc, opts);
  const SimulationReport& r = out.report;
  REQUIRE_FALSE(r.slip_intervals.empty());
  CHECK(r.feature.success);
  CHECK(r.suppressed);
  CHECK_FALSE(r.final_slipping);
  REQUIRE_FALSE(r.commands.empty());
  for (std::size_t i = 0; i < r.commands.size(); ++i) {
    CHECK(r.commands[i].percent > sc.fuzzy.g_min);
    CHECK(r.commands[i].percent <= sc.fuzzy.g_max);
    if (i > 0) CHECK(r.commands[i].percent > r.commands[i - 1].percent);
  }

  // Ground truth agrees with the reported intervals.
  for (const auto& g : out.ground_truth) {
    bool inside = false;
    for (const auto& iv : r.slip_intervals) inside = inside || (g.t >= iv.t_start && g.t < iv.t_end);
    if (g.slipping) CHECK(inside);
  }
  for (std::size_t i = 1; i < out.ground_truth.size(); ++i)
    CHECK(out.ground_truth[i].y_pos >= out.ground_truth[i - 1].y_pos);

  // Grip only moves after a command has had time to arrive.
  const TimeUs delay = TimeUs(std::llround(sc.actuator.delay_s * 1e6));
  for (const auto& f : out.force) {
    if (f.t < sc.timeline.grasp_time + delay) CHECK(f.setpoint == 0.0);
    if (f.setpoint > sc.fuzzy.g_min) CHECK(f.t >= r.commands.front().t + delay);
  }
}

TEST_CASE("flicker fools the raw count but not the features") {
  const auto r = run_closed_loop(bundled_scenario("flicker_noise", 3)).report;
  CHECK(r.slip_intervals.empty());
  CHECK(r.feature.false_flags == 0);
  CHECK(r.baseline.false_flags > 0);
}

TEST_CASE("same seed, same run") {
  RunOptions opts;
  opts.record_events = true;
  const Scenario s = bundled_scenario("load_drop_light", 11);
  const auto a = run_closed_loop(s, opts);
  const auto b = run_closed_loop(s, opts);
  CHECK(a.events == b.events);
  CHECK(a.report.final_y_mm == b.report.final_y_mm);
  CHECK(a.report.feature.flags == b.report.feature.flags);
}

}  // TEST_SUITE
