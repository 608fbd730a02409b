#ifndef EVSLIP_WINDOWS_HPP
#define EVSLIP_WINDOWS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "evslip/labeled_event.hpp"

namespace evslip {

/// Event tallies of one tumbling window [t_start, t_start + dt).
struct WindowCounts {
  std::int64_t window_index = 0;
  TimeUs t_start = 0;
  std::uint32_t c_raw = 0;
  std::uint32_t c_edge = 0;
  std::uint32_t c_corner = 0;

  std::uint32_t c_flat() const noexcept { return c_raw - c_edge - c_corner; }

  friend bool operator==(const WindowCounts&, const WindowCounts&) = default;
};

/// Streams labeled events into windows [k*dt, (k+1)*dt). A window is emitted
/// once an event (or advance_to) passes its end; windows with no events are
/// emitted with zero counts, so the emitted indices are contiguous.
class WindowAccumulator {
 public:
  /// `first_window` is the index of the first window emitted; earlier events
  /// are rejected.
  explicit WindowAccumulator(TimeUs dt_us, std::int64_t first_window = 0);

  template <typename Sink>
  void push(TimeUs t, FeatureClass label, Sink&& sink) {
    advance_to_containing(t, sink);
    ++current_.c_raw;
    if (label == FeatureClass::Edge) ++current_.c_edge;
    else if (label == FeatureClass::Corner) ++current_.c_corner;
  }

  template <typename Sink>
  void push(const LabeledEvent& e, Sink&& sink) {
    push(e.event.t, e.label, sink);
  }

  /// Emits every window that ends at or before `t`.
  template <typename Sink>
  void advance_to(TimeUs t, Sink&& sink) {
    while (current_.t_start + dt_ <= t) close_current(sink);
  }

  /// Emits the window currently open, even if partially elapsed.
  template <typename Sink>
  void flush(Sink&& sink) {
    close_current(sink);
  }

  TimeUs dt() const noexcept { return dt_; }
  const WindowCounts& current() const noexcept { return current_; }

 private:
  template <typename Sink>
  void advance_to_containing(TimeUs t, Sink& sink) {
    check_not_before(t);
    while (t >= current_.t_start + dt_) close_current(sink);
  }

  template <typename Sink>
  void close_current(Sink& sink) {
    sink(static_cast<const WindowCounts&>(current_));
    const std::int64_t next = current_.window_index + 1;
    current_ = WindowCounts{};
    current_.window_index = next;
    current_.t_start = next * dt_;
  }

  void check_not_before(TimeUs t) const;

  TimeUs dt_;
  WindowCounts current_;
};

/// Batch form: buckets the events into windows covering [t_begin, t_end).
/// Pass t_end <= t_begin to stop at the window of the last event.
std::vector<WindowCounts> accumulate_windows(std::span<const LabeledEvent> events, TimeUs dt_us,
                                             TimeUs t_begin = 0, TimeUs t_end = 0);

}  // namespace evslip

#endif  // EVSLIP_WINDOWS_HPP
