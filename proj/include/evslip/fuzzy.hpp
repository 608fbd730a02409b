#ifndef EVSLIP_FUZZY_HPP
#define EVSLIP_FUZZY_HPP

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace evslip {

/// Triangle with feet a, c and peak b. a == b or b == c gives a shoulder.
struct TriangularMF {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double operator()(double x) const noexcept {
    if (x < a || x > c) return 0.0;
    if (x == b) return 1.0;
    if (x < b) return (x - a) / (b - a);
    return (c - x) / (c - b);
  }
};

struct GaussianMF {
  double mean = 0.0;
  double sigma = 1.0;

  double operator()(double g) const noexcept {
    const double z = (g - mean) / sigma;
    return std::exp(-0.5 * z * z);
  }

  template <typename Derived>
  auto operator()(const Eigen::ArrayBase<Derived>& g) const {
    using Scalar = typename Derived::Scalar;
    return (-Scalar(0.5) * ((g - Scalar(mean)) / Scalar(sigma)).square()).exp();
  }
};

enum class InputLabel { S = 0, M = 1, L = 2 };
enum class ForceLabel { VS = 0, S = 1, M = 2, L = 3, VL = 4 };

std::string_view to_string(ForceLabel f) noexcept;
std::optional<ForceLabel> force_label_from_string(std::string_view s) noexcept;

using InputMFs = std::array<TriangularMF, 3>;
using ForceMFs = std::array<GaussianMF, 5>;
/// rules[corner label][edge label] -> force label.
using RuleTable = std::array<std::array<ForceLabel, 3>, 3>;

/// Three triangles with peaks at lo, mid and hi whose feet sit on the
/// neighbouring peaks; the memberships sum to one across [lo, hi].
InputMFs equal_partition(double lo, double hi);

/// Five Gaussians with means 10, 30, 50, 70, 90 and FWHM 20.
ForceMFs default_force_mfs();

RuleTable default_rule_table();

struct FuzzyConfig {
  InputMFs edge_mfs = equal_partition(0.0, 60.0);
  InputMFs corner_mfs = equal_partition(0.0, 30.0);
  ForceMFs force_mfs = default_force_mfs();
  RuleTable rules = default_rule_table();
  double g_min = 10.0;
  double g_max = 100.0;
  int cog_resolution = 1001;

  static FuzzyConfig with_ranges(double e_min, double e_max, double c_min, double c_max);

  void validate() const;
};

class EmptyAggregate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Degrees = Eigen::Vector3d;
/// strengths(corner label, edge label)
using RuleStrengths = Eigen::Matrix3d;

/// Membership degrees (S, M, L); x is clamped into the covered range first.
Degrees fuzzify(double x, const InputMFs& mfs);

RuleStrengths rule_strengths(const Degrees& mu_edge, const Degrees& mu_corner);

/// Aggregated output surface sampled uniformly on [0, 100].
struct AggregatedOutput {
  Eigen::ArrayXd g;
  Eigen::ArrayXd mu;
};

/// max over rules of min(strength, consequent MF), sampled at cog_resolution points.
AggregatedOutput aggregate(const RuleStrengths& strengths, const FuzzyConfig& cfg);

/// Trapezoidal centre of gravity. Throws EmptyAggregate when no rule fired.
double defuzzify_cog(const AggregatedOutput& out);

/// Full inference from crisp incipient-slip counts to a grip estimate.
double infer_grip(double is_e, double is_c, const FuzzyConfig& cfg);

struct GripCommand {
  double percent = 0.0;   // value sent to the gripper
  double estimate = 0.0;  // raw controller output before clamping
};

struct ControllerState {
  double g_old = 0.0;
};

struct SuppressionTrace {
  double is_e = 0.0;
  double is_c = 0.0;
  std::optional<double> estimate;   // empty when no rule fired
  std::optional<double> commanded;  // empty when no command was issued
};

/// Only ever raises the grip: an estimate produces a command when it exceeds
/// both g_min and the previous command; commands are capped at g_max.
class SuppressionController {
 public:
  explicit SuppressionController(FuzzyConfig cfg = {});

  std::optional<GripCommand> step(double is_e, double is_c);

  /// Applies the command policy to an externally computed estimate.
  std::optional<GripCommand> apply_estimate(double estimate);

  const ControllerState& state() const noexcept { return state_; }
  const FuzzyConfig& config() const noexcept { return cfg_; }
  const std::vector<SuppressionTrace>& trace() const noexcept { return trace_; }

 private:
  FuzzyConfig cfg_;
  ControllerState state_;
  std::vector<SuppressionTrace> trace_;
};

}  // namespace evslip

#endif  // EVSLIP_FUZZY_HPP
