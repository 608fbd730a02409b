#ifndef EVSLIP_EVENT_HPP
#define EVSLIP_EVENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evslip {

/// Microsecond timestamp. All time arithmetic on the hot path is integral.
using TimeUs = std::int64_t;

/// One camera spike.
struct Event {
  TimeUs t = 0;
  int x = 0;
  int y = 0;
  int pol = 1;  // +1 or -1

  friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
  int width = 240;
  int height = 180;

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  void validate() const;
};

class EventError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedRecord : public EventError {
 public:
  using EventError::EventError;
};

class OutOfRange : public EventError {
 public:
  using EventError::EventError;
};

class NonMonotonic : public EventError {
 public:
  using EventError::EventError;
};

/// Parses `t_us,x,y,pol` records against a sensor geometry and enforces
/// stream ordering. Events may run backwards by at most `slack_us` relative
/// to the newest accepted timestamp.
class EventParser {
 public:
  explicit EventParser(SensorGeometry geometry = {}, TimeUs slack_us = 0);

  Event parse(std::string_view record);

  /// Validates an already-constructed event under the same rules as parse().
  Event accept(const Event& e);

  const SensorGeometry& geometry() const noexcept { return geometry_; }
  std::optional<TimeUs> newest() const noexcept { return newest_; }
  void reset() noexcept { newest_.reset(); }

 private:
  SensorGeometry geometry_;
  TimeUs slack_us_;
  std::optional<TimeUs> newest_;
};

/// Reads an event log. Blank lines and lines starting with '#' are skipped.
/// Errors carry the 1-based line number.
std::vector<Event> read_event_log(std::istream& in, const SensorGeometry& geometry = {},
                                  TimeUs slack_us = 0);
std::vector<Event> read_event_log_file(const std::string& path,
                                       const SensorGeometry& geometry = {},
                                       TimeUs slack_us = 0);

void write_event(std::ostream& out, const Event& e);
void write_event_log(std::ostream& out, const std::vector<Event>& events,
                     const SensorGeometry& geometry);

}  // namespace evslip

#endif  // EVSLIP_EVENT_HPP
