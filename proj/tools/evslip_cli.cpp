// evslip: slip detection and suppression from event streams.
//
// Exit codes
//   0  success
//   1  unexpected internal error
//   2  command-line usage error
//   3  file I/O error
//   4  malformed input (event log, thresholds or scenario JSON)
//   5  invalid configuration
//   6  empty noise sample
//   7  detection requested without thresholds

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "evslip/closed_loop.hpp"
#include "evslip/emulator.hpp"
#include "evslip/pipeline.hpp"
#include "evslip/report.hpp"
#include "evslip/scenario.hpp"

namespace fs = std::filesystem;
using namespace evslip;

namespace {

enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kIo = 3,
  kMalformed = 4,
  kConfig = 5,
  kEmptySample = 6,
  kNoThresholds = 7,
};

constexpr const char* kConfigEnv = "EVSLIP_CONFIG";

struct Common {
  std::string config;
  std::string scenario = "calm";
  std::string out = "evslip_out";
  std::optional<std::uint64_t> seed;
  std::optional<TimeUs> dt_us;
  std::optional<double> s_bias;
  std::string detector = "both";
  bool verbose = false;
};

void log(const Common& c, const std::string& msg) {
  if (c.verbose) std::cerr << "evslip: " << msg << '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path.string() + "'");
  out << text;
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path.string() + "'");
  fn(out);
}

fs::path out_dir(const Common& c) {
  fs::path dir(c.out);
  fs::create_directories(dir);
  return dir;
}

// Scenario from --config, else $EVSLIP_CONFIG, else the bundled --scenario.
Scenario resolve_scenario(const Common& c) {
  std::string path = c.config;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnv); env && *env) path = env;
  }
  Scenario s = path.empty() ? bundled_scenario(c.scenario) : load_scenario_file(path);
  if (c.seed) s.seed = *c.seed;
  if (c.dt_us) s.detector.dt_us = *c.dt_us;
  if (c.s_bias) s.detector.s_bias = *c.s_bias;
  s.validate();
  return s;
}

int cmd_sample(const Common& c, const std::string& input, TimeUs duration_us) {
  Scenario s = resolve_scenario(c);
  std::vector<Event> events;
  if (!input.empty()) {
    events = read_event_log_file(input, s.geometry);
    log(c, "read " + std::to_string(events.size()) + " events from " + input);
  } else {
    NoiseModel noise = s.noise;
    noise.rng_seed = s.seed;
    EventEmulator emu(s.geometry, s.marker.build(), noise, s.sensor_latency_us);
    if (duration_us >= kEmulatorTickUs) emu.advance(0, duration_us, emu.marker().pose, events);
    log(c, "emulated " + std::to_string(events.size()) + " calm events");
  }
  const LabeledLog labeled = label_log(events, s.geometry, s.detector.dt_us, s.harris);
  if (labeled.windows.empty()) throw EmptySample("no events to sample");
  const NoiseThresholds th = sample_noise_thresholds(labeled.windows);
  const fs::path dir = out_dir(c);
  write_file(dir / "thresholds.json", thresholds_json(th, s.detector.dt_us, labeled.windows.size()));
  std::cout << "th_rmax=" << th.th_rmax << " th_emax=" << th.th_emax << " th_cmax=" << th.th_cmax << '\n';
  return kOk;
}

int cmd_detect(const Common& c, const std::string& input, const std::string& thresholds_path) {
  Scenario s = resolve_scenario(c);
  if (thresholds_path.empty()) throw StageViolation("detection needs noise thresholds (--thresholds)");
  TimeUs sampled_dt = s.detector.dt_us;
  const NoiseThresholds th = parse_thresholds(read_file(thresholds_path), &sampled_dt);
  if (!c.dt_us) s.detector.dt_us = sampled_dt;
  const auto which = approach_filter_from_string(c.detector);
  const std::vector<Event> events = read_event_log_file(input, s.geometry);
  log(c, "read " + std::to_string(events.size()) + " events from " + input);

  const DetectionResult r = detect_log(events, s.geometry, th, s.detector, s.harris);
  const fs::path dir = out_dir(c);
  write_file(dir / "report.json", detection_json(r, which));
  write_stream(dir / "windows.csv", [&](std::ostream& o) { write_windows_csv(o, r.windows); });
  if (c.verbose) {
    SurfaceOfActiveEvents sae(s.geometry);
    const auto labeled = label_stream(events, sae, s.harris);
    write_stream(dir / "labeled.csv", [&](std::ostream& o) { write_labeled_csv(o, labeled); });
  }
  if (which != ApproachFilter::Feature) std::cout << "baseline episodes: " << r.baseline.size() << '\n';
  if (which != ApproachFilter::Baseline) std::cout << "feature episodes: " << r.feature.size() << '\n';
  return kOk;
}

int cmd_simulate(const Common& c) {
  const Scenario s = resolve_scenario(c);
  const auto which = approach_filter_from_string(c.detector);
  RunOptions opts;
  opts.record_events = true;
  opts.record_windows = true;
  opts.record_ground_truth = true;
  log(c, "running scenario '" + s.name + "' seed " + std::to_string(s.seed));
  const SimulationOutput run = run_closed_loop(s, opts);
  const SimulationReport& r = run.report;

  const fs::path dir = out_dir(c);
  write_file(dir / "scenario.json", dump_scenario(s));
  write_stream(dir / "events.csv", [&](std::ostream& o) { write_event_log(o, run.events, s.geometry); });
  write_stream(dir / "ground_truth.csv", [&](std::ostream& o) { write_ground_truth_csv(o, run.ground_truth); });
  write_stream(dir / "windows.csv", [&](std::ostream& o) { write_windows_csv(o, run.windows); });
  write_stream(dir / "force.csv", [&](std::ostream& o) { write_force_csv(o, run.force); });
  write_file(dir / "fuzzy_trace.json", fuzzy_trace_json(r.fuzzy_trace));
  write_file(dir / "report.json", simulation_json(r, which));

  if (which != ApproachFilter::Feature)
    std::cout << "baseline: episodes=" << r.baseline.episodes << " false=" << r.baseline.false_flags << '\n';
  if (which != ApproachFilter::Baseline)
    std::cout << "feature: episodes=" << r.feature.episodes << " false=" << r.feature.false_flags << '\n';
  std::cout << "commands=" << r.commands.size() << " final_slipping=" << (r.final_slipping ? "true" : "false")
            << " suppressed=" << (r.suppressed ? "true" : "false");
  if (r.q_sm_mm) std::cout << " q_sm_mm=" << *r.q_sm_mm;
  std::cout << '\n';
  return kOk;
}

int cmd_scenario(const Common& c, bool list) {
  if (list) {
    for (const auto& n : bundled_scenario_names()) std::cout << n << '\n';
    return kOk;
  }
  std::cout << dump_scenario(resolve_scenario(c));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-camera slip detection and grip suppression"};
  app.require_subcommand(1);
  Common c;
  app.add_option("--config", c.config, std::string("Scenario JSON; defaults to $") + kConfigEnv);
  app.add_option("--scenario", c.scenario, "Bundled scenario used when no config is given");
  app.add_option("--out", c.out, "Output directory");
  app.add_option("--seed", c.seed, "Seed override");
  app.add_option("--dt-us", c.dt_us, "Window length in microseconds")->check(CLI::PositiveNumber);
  app.add_option("--s-bias", c.s_bias, "Threshold bias")->check(CLI::NonNegativeNumber);
  app.add_option("--detector", c.detector, "Approaches to report")
      ->check(CLI::IsMember({"baseline", "feature", "both"}));
  app.add_flag("-v,--verbose", c.verbose, "Progress on stderr; detect also writes labeled.csv");

  std::string input;
  TimeUs duration_us = 2'000'000;
  auto* sample = app.add_subcommand("sample", "Noise thresholds from a calm log or the emulator");
  sample->add_option("log", input, "Event log; emulate a calm scene when omitted");
  sample->add_option("--duration-us", duration_us, "Emulated duration")->check(CLI::NonNegativeNumber);

  std::string detect_input;
  std::string thresholds;
  auto* detect = app.add_subcommand("detect", "Slip detection over an event log");
  detect->add_option("log", detect_input, "Event log")->required();
  detect->add_option("--thresholds", thresholds, "Thresholds JSON written by sample");

  auto* simulate = app.add_subcommand("simulate", "Closed-loop grasp simulation");

  bool list = false;
  auto* scenario = app.add_subcommand("scenario", "Print a scenario as JSON");
  scenario->add_flag("--list", list, "List bundled scenario names");

  // Global options are accepted after the subcommand too.
  for (auto* sub : {sample, detect, simulate, scenario}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sample) return cmd_sample(c, input, duration_us);
    if (*detect) return cmd_detect(c, detect_input, thresholds);
    if (*simulate) return cmd_simulate(c);
    if (*scenario) return cmd_scenario(c, list);
  } catch (const EventError& e) {
    std::cerr << "evslip: malformed event log: " << e.what() << '\n';
    return kMalformed;
  } catch (const ReportError& e) {
    std::cerr << "evslip: " << e.what() << '\n';
    return kMalformed;
  } catch (const ScenarioSyntaxError& e) {
    std::cerr << "evslip: malformed scenario: " << e.what() << '\n';
    return kMalformed;
  } catch (const ScenarioError& e) {
    std::cerr << "evslip: invalid scenario: " << e.what() << '\n';
    return kConfig;
  } catch (const EmptySample& e) {
    std::cerr << "evslip: EmptySample: " << e.what() << '\n';
    return kEmptySample;
  } catch (const StageViolation& e) {
    std::cerr << "evslip: StageViolation: " << e.what() << '\n';
    return kNoThresholds;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "evslip: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "evslip: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "evslip: invalid configuration: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "evslip: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
