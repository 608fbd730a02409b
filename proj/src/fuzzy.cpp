#include "evslip/fuzzy.hpp"

#include <algorithm>

namespace evslip {

namespace {
// sigma giving a full width at half maximum of 20 force percent.
constexpr double kForceSigma = 8.49;
}  // namespace

std::string_view to_string(ForceLabel f) noexcept {
  switch (f) {
    case ForceLabel::VS:
      return "VS";
    case ForceLabel::S:
      return "S";
    case ForceLabel::M:
      return "M";
    case ForceLabel::L:
      return "L";
    case ForceLabel::VL:
      return "VL";
  }
  return "M";
}

std::optional<ForceLabel> force_label_from_string(std::string_view s) noexcept {
  if (s == "VS") return ForceLabel::VS;
  if (s == "S") return ForceLabel::S;
  if (s == "M") return ForceLabel::M;
  if (s == "L") return ForceLabel::L;
  if (s == "VL") return ForceLabel::VL;
  return std::nullopt;
}

InputMFs equal_partition(double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  return {TriangularMF{lo, lo, mid}, TriangularMF{lo, mid, hi}, TriangularMF{mid, hi, hi}};
}

ForceMFs default_force_mfs() {
  return {GaussianMF{10.0, kForceSigma}, GaussianMF{30.0, kForceSigma}, GaussianMF{50.0, kForceSigma},
          GaussianMF{70.0, kForceSigma}, GaussianMF{90.0, kForceSigma}};
}

RuleTable default_rule_table() {
  using F = ForceLabel;
  return {{{F::VS, F::S, F::M}, {F::S, F::M, F::L}, {F::M, F::L, F::VL}}};
}

FuzzyConfig FuzzyConfig::with_ranges(double e_min, double e_max, double c_min, double c_max) {
  FuzzyConfig cfg;
  cfg.edge_mfs = equal_partition(e_min, e_max);
  cfg.corner_mfs = equal_partition(c_min, c_max);
  return cfg;
}

void FuzzyConfig::validate() const {
  auto check_inputs = [](const InputMFs& mfs, const char* name) {
    for (const auto& mf : mfs) {
      if (!(mf.a <= mf.b && mf.b <= mf.c))
        throw std::invalid_argument(std::string(name) + " membership functions need a <= b <= c");
    }
    if (!(mfs[0].a < mfs[2].c))
      throw std::invalid_argument(std::string(name) + " input range must be non-empty");
  };
  check_inputs(edge_mfs, "edge");
  check_inputs(corner_mfs, "corner");
  for (std::size_t i = 0; i < force_mfs.size(); ++i) {
    if (!(force_mfs[i].sigma > 0.0)) throw std::invalid_argument("force MF sigma must be positive");
    if (i > 0 && !(force_mfs[i].mean > force_mfs[i - 1].mean))
      throw std::invalid_argument("force MF means must be strictly increasing");
  }
  if (!(0.0 <= g_min && g_min < g_max && g_max <= 100.0))
    throw std::invalid_argument("grip limits must satisfy 0 <= g_min < g_max <= 100");
  if (cog_resolution < 2) throw std::invalid_argument("cog_resolution must be at least 2");
}

Degrees fuzzify(double x, const InputMFs& mfs) {
  const double lo = mfs[0].a;
  const double hi = mfs[2].c;
  const double clamped = std::clamp(x, lo, hi);
  return Degrees(mfs[0](clamped), mfs[1](clamped), mfs[2](clamped));
}

RuleStrengths rule_strengths(const Degrees& mu_edge, const Degrees& mu_corner) {
  RuleStrengths s;
  for (int c = 0; c < 3; ++c)
    for (int e = 0; e < 3; ++e) s(c, e) = std::min(mu_corner(c), mu_edge(e));
  return s;
}

AggregatedOutput aggregate(const RuleStrengths& strengths, const FuzzyConfig& cfg) {
  AggregatedOutput out;
  out.g = Eigen::ArrayXd::LinSpaced(cfg.cog_resolution, 0.0, 100.0);
  out.mu = Eigen::ArrayXd::Zero(cfg.cog_resolution);
  // Rules sharing a consequent clip the same MF; only the strongest matters.
  std::array<double, 5> level{};
  for (int c = 0; c < 3; ++c)
    for (int e = 0; e < 3; ++e) {
      const auto label = static_cast<std::size_t>(cfg.rules[c][e]);
      level[label] = std::max(level[label], strengths(c, e));
    }
  for (std::size_t k = 0; k < level.size(); ++k) {
    if (level[k] <= 0.0) continue;
    out.mu = out.mu.max(cfg.force_mfs[k](out.g).min(level[k]));
  }
  return out;
}

double defuzzify_cog(const AggregatedOutput& out) {
  const Eigen::Index n = out.g.size();
  if (n < 2 || out.mu.size() != n) throw std::invalid_argument("aggregate needs at least two samples");
  const Eigen::ArrayXd dg = out.g.tail(n - 1) - out.g.head(n - 1);
  const Eigen::ArrayXd gm = out.g * out.mu;
  const double mass = (0.5 * dg * (out.mu.head(n - 1) + out.mu.tail(n - 1))).sum();
  const double moment = (0.5 * dg * (gm.head(n - 1) + gm.tail(n - 1))).sum();
  if (!(mass > 0.0)) throw EmptyAggregate("no rule fired; aggregated output is identically zero");
  return moment / mass;
}

double infer_grip(double is_e, double is_c, const FuzzyConfig& cfg) {
  const Degrees mu_e = fuzzify(is_e, cfg.edge_mfs);
  const Degrees mu_c = fuzzify(is_c, cfg.corner_mfs);
  return defuzzify_cog(aggregate(rule_strengths(mu_e, mu_c), cfg));
}

SuppressionController::SuppressionController(FuzzyConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  state_.g_old = cfg_.g_min;
}

std::optional<GripCommand> SuppressionController::step(double is_e, double is_c) {
  SuppressionTrace entry{is_e, is_c, std::nullopt, std::nullopt};
  std::optional<GripCommand> cmd;
  try {
    const double estimate = infer_grip(is_e, is_c, cfg_);
    entry.estimate = estimate;
    cmd = apply_estimate(estimate);
    // apply_estimate appended its own entry; fold the inputs into it.
    trace_.back().is_e = is_e;
    trace_.back().is_c = is_c;
    return cmd;
  } catch (const EmptyAggregate&) {
    trace_.push_back(entry);
    return std::nullopt;
  }
}

std::optional<GripCommand> SuppressionController::apply_estimate(double estimate) {
  SuppressionTrace entry;
  entry.estimate = estimate;
  std::optional<GripCommand> cmd;
  const double commanded = std::min(estimate, cfg_.g_max);
  if (estimate > cfg_.g_min && commanded > state_.g_old) {
    cmd = GripCommand{commanded, estimate};
    state_.g_old = commanded;
    entry.commanded = commanded;
  }
  trace_.push_back(entry);
  return cmd;
}

}  // namespace evslip
