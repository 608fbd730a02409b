#include "evslip/report.hpp"

#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace evslip {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

ordered thresholds_obj(const NoiseThresholds& th) {
  return {{"th_rmax", th.th_rmax}, {"th_emax", th.th_emax}, {"th_cmax", th.th_cmax}};
}

ordered flag_obj(const SlipEvent& f) {
  ordered o = {{"window", f.window_index},
               {"t_detect", f.t_detect},
               {"kind", std::string(to_string(f.kind))}};
  if (f.approach == Approach::Baseline) {
    o["s_r"] = f.s_r;
  } else {
    o["s_e"] = f.s_e;
    o["s_c"] = f.s_c;
  }
  return o;
}

ordered episodes_obj(const std::vector<SlipEpisode>& episodes) {
  ordered flags = ordered::array();
  ordered incipient = ordered::array();
  for (const auto& ep : episodes) {
    incipient.push_back(flag_obj(ep.head()));
    for (const auto& f : ep.windows) flags.push_back(flag_obj(f));
  }
  return {{"episodes", episodes.size()}, {"incipient", incipient}, {"flags", flags}};
}

ordered summary_obj(const ApproachSummary& s) {
  ordered flags = ordered::array();
  for (const auto& f : s.flags) flags.push_back(flag_obj(f));
  ordered matches = ordered::array();
  for (const auto& m : s.intervals) {
    ordered o = {{"detected", m.detected}};
    o["latency_us"] = m.latency_us ? ordered(*m.latency_us) : ordered(nullptr);
    o["first_kind"] = m.first_kind ? ordered(std::string(to_string(*m.first_kind))) : ordered(nullptr);
    matches.push_back(o);
  }
  return {{"episodes", s.episodes},
          {"false_flags", s.false_flags},
          {"false_episodes", s.false_episodes},
          {"success", s.success},
          {"intervals", matches},
          {"flags", flags}};
}

}  // namespace

std::string thresholds_json(const NoiseThresholds& th, TimeUs dt_us, std::size_t windows) {
  ordered o = thresholds_obj(th);
  o["dt_us"] = dt_us;
  o["windows"] = windows;
  return o.dump(2) + "\n";
}

NoiseThresholds parse_thresholds(std::string_view json_text, TimeUs* dt_us) {
  try {
    const json j = json::parse(json_text);
    NoiseThresholds th;
    th.th_rmax = j.at("th_rmax").get<std::uint32_t>();
    th.th_emax = j.at("th_emax").get<std::uint32_t>();
    th.th_cmax = j.at("th_cmax").get<std::uint32_t>();
    if (dt_us && j.contains("dt_us")) *dt_us = j["dt_us"].get<TimeUs>();
    return th;
  } catch (const json::exception& e) {
    throw ReportError(std::string("thresholds JSON: ") + e.what());
  }
}

ApproachFilter approach_filter_from_string(std::string_view s) {
  if (s == "baseline") return ApproachFilter::Baseline;
  if (s == "feature") return ApproachFilter::Feature;
  if (s == "both") return ApproachFilter::Both;
  throw std::invalid_argument("detector must be baseline, feature or both");
}

std::string detection_json(const DetectionResult& r, ApproachFilter which) {
  ordered o;
  o["thresholds"] = thresholds_obj(r.thresholds);
  o["dt_us"] = r.config.dt_us;
  o["s_bias"] = r.config.s_bias;
  o["windows"] = r.windows.size();
  if (which != ApproachFilter::Feature) o["baseline"] = episodes_obj(r.baseline);
  if (which != ApproachFilter::Baseline) o["feature"] = episodes_obj(r.feature);
  return o.dump(2) + "\n";
}

std::string simulation_json(const SimulationReport& r, ApproachFilter which) {
  ordered o;
  o["scenario"] = r.scenario;
  o["seed"] = r.seed;
  o["dt_us"] = r.dt_us;
  o["s_bias"] = r.s_bias;
  o["thresholds"] = thresholds_obj(r.thresholds);
  o["sampled_windows"] = r.sampled_windows;
  o["monitored_windows"] = r.monitored_windows;
  o["events"] = {{"total", r.total_events}, {"edge", r.edge_events}, {"corner", r.corner_events}};
  ordered intervals = ordered::array();
  for (const auto& iv : r.slip_intervals) {
    intervals.push_back({{"t_start", iv.t_start},
                         {"t_end", iv.t_end},
                         {"displacement_mm", iv.displacement_mm},
                         {"monitored", iv.monitored}});
  }
  o["slip_intervals"] = intervals;
  if (which != ApproachFilter::Feature) o["baseline"] = summary_obj(r.baseline);
  if (which != ApproachFilter::Baseline) o["feature"] = summary_obj(r.feature);
  ordered commands = ordered::array();
  for (const auto& c : r.commands) commands.push_back({{"t", c.t}, {"percent", c.percent}, {"estimate", c.estimate}});
  o["commands"] = commands;
  o["final_slipping"] = r.final_slipping;
  o["final_y_mm"] = r.final_y_mm;
  o["q_sm_mm"] = r.q_sm_mm ? ordered(*r.q_sm_mm) : ordered(nullptr);
  if (!r.q_sm_mm) o["q_sm_error"] = r.q_sm_error;
  o["suppressed"] = r.suppressed;
  return o.dump(2) + "\n";
}

std::string fuzzy_trace_json(std::span<const SuppressionTrace> trace) {
  ordered a = ordered::array();
  for (const auto& t : trace) {
    ordered o = {{"is_e", t.is_e}, {"is_c", t.is_c}};
    o["estimate"] = t.estimate ? ordered(*t.estimate) : ordered(nullptr);
    o["commanded"] = t.commanded ? ordered(*t.commanded) : ordered(nullptr);
    a.push_back(o);
  }
  return a.dump(2) + "\n";
}

void write_windows_csv(std::ostream& out, std::span<const WindowRecord> windows) {
  out << "window,t_start,c_raw,c_edge,c_corner,c_flat,stage,baseline_flag,feature_flag\n";
  for (const auto& w : windows) {
    const auto& c = w.counts;
    out << c.window_index << ',' << c.t_start << ',' << c.c_raw << ',' << c.c_edge << ',' << c.c_corner
        << ',' << c.c_flat() << ',' << to_string(w.stage) << ',' << int(w.baseline_flag) << ','
        << int(w.feature_flag) << '\n';
  }
}

void write_labeled_csv(std::ostream& out, std::span<const LabeledEvent> events) {
  out << "t_us,x,y,pol,label,score\n";
  for (const auto& e : events) {
    out << e.event.t << ',' << e.event.x << ',' << e.event.y << ',' << e.event.pol << ','
        << to_string(e.label) << ',' << fmt("%.9g", e.score) << '\n';
  }
}

void write_ground_truth_csv(std::ostream& out, std::span<const GroundTruthSample> samples) {
  out << "t_us,slipping,y_pos\n";
  for (const auto& s : samples) out << s.t << ',' << int(s.slipping) << ',' << fmt("%.9g", s.y_pos) << '\n';
}

void write_force_csv(std::ostream& out, std::span<const ForceSample> samples) {
  out << "t_us,setpoint,grip,normal_force_n\n";
  for (const auto& s : samples) {
    out << s.t << ',' << fmt("%.6g", s.setpoint) << ',' << fmt("%.6g", s.grip) << ','
        << fmt("%.6g", s.normal_force_n) << '\n';
  }
}

}  // namespace evslip
