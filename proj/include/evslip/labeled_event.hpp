#ifndef EVSLIP_LABELED_EVENT_HPP
#define EVSLIP_LABELED_EVENT_HPP

#include <optional>
#include <string_view>

#include "evslip/event.hpp"

namespace evslip {

enum class FeatureClass { Corner, Edge, Flat };

std::string_view to_string(FeatureClass c) noexcept;
std::optional<FeatureClass> feature_class_from_string(std::string_view s) noexcept;

struct LabeledEvent {
  Event event;
  FeatureClass label = FeatureClass::Flat;
  double score = 0.0;
};

}  // namespace evslip

#endif  // EVSLIP_LABELED_EVENT_HPP
