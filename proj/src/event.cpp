#include "evslip/event.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace evslip {

namespace {

template <typename T>
bool parse_field(std::string_view& rest, T& out, bool last) {
  const auto comma = rest.find(',');
  if (last != (comma == std::string_view::npos)) return false;
  std::string_view field = last ? rest : rest.substr(0, comma);
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    field.remove_suffix(1);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto* first = field.data();
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, end, out);
  if (ec != std::errc{} || ptr != end) return false;
  rest = last ? std::string_view{} : rest.substr(comma + 1);
  return true;
}

}  // namespace

void SensorGeometry::validate() const {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("sensor geometry must have positive width and height");
}

EventParser::EventParser(SensorGeometry geometry, TimeUs slack_us)
    : geometry_(geometry), slack_us_(slack_us) {
  geometry_.validate();
  if (slack_us_ < 0) throw std::invalid_argument("ordering slack must be nonnegative");
}

Event EventParser::parse(std::string_view record) {
  Event e;
  std::string_view rest = record;
  if (!parse_field(rest, e.t, false) || !parse_field(rest, e.x, false) ||
      !parse_field(rest, e.y, false) || !parse_field(rest, e.pol, true)) {
    throw MalformedRecord("malformed event record '" + std::string(record) +
                          "', expected t_us,x,y,pol");
  }
  return accept(e);
}

Event EventParser::accept(const Event& e) {
  if (e.t < 0) throw OutOfRange("negative timestamp " + std::to_string(e.t));
  if (!geometry_.contains(e.x, e.y)) {
    throw OutOfRange("pixel (" + std::to_string(e.x) + "," + std::to_string(e.y) +
                     ") outside " + std::to_string(geometry_.width) + "x" +
                     std::to_string(geometry_.height) + " sensor");
  }
  if (e.pol != 1 && e.pol != -1) throw OutOfRange("polarity must be +1 or -1, got " + std::to_string(e.pol));
  if (newest_ && e.t + slack_us_ < *newest_) {
    throw NonMonotonic("timestamp " + std::to_string(e.t) + " precedes " +
                       std::to_string(*newest_) + " by more than the allowed slack");
  }
  if (!newest_ || e.t > *newest_) newest_ = e.t;
  return e;
}

std::vector<Event> read_event_log(std::istream& in, const SensorGeometry& geometry,
                                  TimeUs slack_us) {
  EventParser parser(geometry, slack_us);
  std::vector<Event> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    while (!view.empty() && (view.front() == ' ' || view.front() == '\t')) view.remove_prefix(1);
    if (view.empty() || view.front() == '#' || view == "\r") continue;
    try {
      events.push_back(parser.parse(view));
    } catch (const MalformedRecord& err) {
      throw MalformedRecord("line " + std::to_string(line_no) + ": " + err.what());
    } catch (const OutOfRange& err) {
      throw OutOfRange("line " + std::to_string(line_no) + ": " + err.what());
    } catch (const NonMonotonic& err) {
      throw NonMonotonic("line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return events;
}

std::vector<Event> read_event_log_file(const std::string& path, const SensorGeometry& geometry,
                                       TimeUs slack_us) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open event log '" + path + "'");
  return read_event_log(in, geometry, slack_us);
}

void write_event(std::ostream& out, const Event& e) {
  out << e.t << ',' << e.x << ',' << e.y << ',' << e.pol << '\n';
}

void write_event_log(std::ostream& out, const std::vector<Event>& events,
                     const SensorGeometry& geometry) {
  out << "# t_us,x,y,pol sensor=" << geometry.width << "x" << geometry.height << '\n';
  for (const auto& e : events) write_event(out, e);
}

}  // namespace evslip
