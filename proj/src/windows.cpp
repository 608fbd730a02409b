#include "evslip/windows.hpp"

#include <stdexcept>
#include <string>

namespace evslip {

WindowAccumulator::WindowAccumulator(TimeUs dt_us, std::int64_t first_window) : dt_(dt_us) {
  if (dt_ <= 0) throw std::invalid_argument("window width must be positive");
  if (first_window < 0) throw std::invalid_argument("first window index must be nonnegative");
  current_.window_index = first_window;
  current_.t_start = first_window * dt_;
}

void WindowAccumulator::check_not_before(TimeUs t) const {
  if (t < current_.t_start) {
    throw NonMonotonic("event at " + std::to_string(t) + " us precedes open window starting at " +
                       std::to_string(current_.t_start) + " us");
  }
}

std::vector<WindowCounts> accumulate_windows(std::span<const LabeledEvent> events, TimeUs dt_us,
                                             TimeUs t_begin, TimeUs t_end) {
  if (dt_us <= 0) throw std::invalid_argument("window width must be positive");
  if (t_begin < 0) throw std::invalid_argument("window origin must be nonnegative");
  std::vector<WindowCounts> out;
  WindowAccumulator acc(dt_us, t_begin / dt_us);
  auto sink = [&out](const WindowCounts& w) { out.push_back(w); };
  for (const auto& e : events) {
    if (t_end > t_begin && e.event.t >= t_end) break;
    acc.push(e, sink);
  }
  if (t_end > t_begin) {
    acc.advance_to(t_end, sink);
    if (acc.current().t_start < t_end) acc.flush(sink);
  } else if (!events.empty()) {
    acc.flush(sink);
  }
  return out;
}

}  // namespace evslip
