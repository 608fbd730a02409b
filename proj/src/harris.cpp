#include "evslip/harris.hpp"

#include <string>

namespace evslip {

std::string_view to_string(FeatureClass c) noexcept {
  switch (c) {
    case FeatureClass::Corner:
      return "corner";
    case FeatureClass::Edge:
      return "edge";
    case FeatureClass::Flat:
      return "flat";
  }
  return "flat";
}

std::optional<FeatureClass> feature_class_from_string(std::string_view s) noexcept {
  if (s == "corner") return FeatureClass::Corner;
  if (s == "edge") return FeatureClass::Edge;
  if (s == "flat") return FeatureClass::Flat;
  return std::nullopt;
}

void HarrisParams::validate() const {
  if (patch_side <= 0 || patch_side % 2 == 0 || patch_side > 19)
    throw std::invalid_argument("patch_side must be odd and in [1, 19]");
  if (n_latest <= 0 || n_latest > patch_side * patch_side)
    throw std::invalid_argument("n_latest must lie in [1, patch_side^2]");
  if (!(edge_threshold < 0.0 && 0.0 < corner_threshold))
    throw std::invalid_argument("thresholds must satisfy edge < 0 < corner");
  if (!(gaussian_sigma > 0.0)) throw std::invalid_argument("gaussian_sigma must be positive");
}

FeatureClass classify_event(double score, const HarrisParams& params) noexcept {
  if (score >= params.corner_threshold) return FeatureClass::Corner;
  if (score <= params.edge_threshold) return FeatureClass::Edge;
  return FeatureClass::Flat;
}

EHarrisDetector::EHarrisDetector(HarrisParams params)
    : params_(params), binarizer_(params.patch_side, params.n_latest), kernel_(params) {}

FeatureDecision EHarrisDetector::classify(const Event& e, const SurfaceOfActiveEvents& sae) {
  const double score = kernel_.score_cells(binarizer_.select(sae, e.x, e.y));
  return {classify_event(score, params_), score};
}

FeatureDecision EFastDetector::classify(const Event&, const SurfaceOfActiveEvents&) {
  throw NotImplemented("e-FAST detector is not implemented");
}

FeatureDecision ArcStarDetector::classify(const Event&, const SurfaceOfActiveEvents&) {
  throw NotImplemented("ARC* detector is not implemented");
}

EventLabeler::EventLabeler(SensorGeometry geometry, HarrisParams params)
    : EventLabeler(geometry, std::make_unique<EHarrisDetector>(params)) {}

EventLabeler::EventLabeler(SensorGeometry geometry, std::unique_ptr<FeatureDetector> detector)
    : sae_(geometry), detector_(std::move(detector)) {
  if (!detector_) throw std::invalid_argument("feature detector must not be null");
}

std::vector<LabeledEvent> label_stream(std::span<const Event> events, SurfaceOfActiveEvents& sae,
                                       const HarrisParams& params) {
  EHarrisDetector detector(params);
  EventParser validator(sae.geometry());
  std::vector<LabeledEvent> out;
  out.reserve(events.size());
  for (const auto& raw : events) {
    const Event e = validator.accept(raw);
    sae.update(e);
    const FeatureDecision d = detector.classify(e, sae);
    out.push_back({e, d.label, d.score});
  }
  return out;
}

}  // namespace evslip
