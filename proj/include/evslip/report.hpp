#ifndef EVSLIP_REPORT_HPP
#define EVSLIP_REPORT_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "evslip/closed_loop.hpp"
#include "evslip/pipeline.hpp"

namespace evslip {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"th_rmax": .., "th_emax": .., "th_cmax": .., "dt_us": .., "windows": ..}
std::string thresholds_json(const NoiseThresholds& th, TimeUs dt_us, std::size_t windows);

/// Reads the thresholds written by thresholds_json. Throws ReportError; a
/// missing dt_us leaves `dt_us` untouched.
NoiseThresholds parse_thresholds(std::string_view json_text, TimeUs* dt_us = nullptr);

enum class ApproachFilter { Baseline, Feature, Both };
ApproachFilter approach_filter_from_string(std::string_view s);

std::string detection_json(const DetectionResult& r, ApproachFilter which);
std::string simulation_json(const SimulationReport& r, ApproachFilter which);
/// Per-step fuzzy trace: [{"is_e", "is_c", "estimate", "commanded"}, ...]
std::string fuzzy_trace_json(std::span<const SuppressionTrace> trace);

void write_windows_csv(std::ostream& out, std::span<const WindowRecord> windows);
/// t_us,x,y,pol,label,score
void write_labeled_csv(std::ostream& out, std::span<const LabeledEvent> events);
/// t_us,slipping,y_pos
void write_ground_truth_csv(std::ostream& out, std::span<const GroundTruthSample> samples);
/// t_us,setpoint,grip,normal_force_n
void write_force_csv(std::ostream& out, std::span<const ForceSample> samples);

}  // namespace evslip

#endif  // EVSLIP_REPORT_HPP
