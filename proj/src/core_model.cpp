#include "kfn/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kfn/errors.hpp"

namespace kfn {

TimeInterval TimeInterval::make(Tick start, Tick end) {
  if (start < 0) {
    throw InvalidInterval("interval start " + std::to_string(start) + " is negative");
  }
  if (end <= start) {
    throw EmptyInterval("empty interval [" + std::to_string(start) + "," +
                        std::to_string(end) + ")");
  }
  return TimeInterval(start, end);
}

TimeInterval make_interval(Tick start, Tick end) { return TimeInterval::make(start, end); }

bool overlaps(const TimeInterval& a, const TimeInterval& b) noexcept {
  return std::max(a.start(), b.start()) < std::min(a.end(), b.end());
}

Calendar::Calendar(std::vector<CalendarEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
    return a.interval.start() < b.interval.start();
  });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (overlaps(entries_[i - 1].interval, entries_[i].interval)) {
      throw OverlappingEntries("calendar entries overlap at tick " +
                               std::to_string(entries_[i].interval.start()));
    }
  }
}

void Calendar::insert(const TimeInterval& interval, BusyKind kind) {
  auto pos = std::lower_bound(
      entries_.begin(), entries_.end(), interval.start(),
      [](const CalendarEntry& e, Tick start) { return e.interval.start() < start; });
  if ((pos != entries_.end() && overlaps(pos->interval, interval)) ||
      (pos != entries_.begin() && overlaps(std::prev(pos)->interval, interval))) {
    throw OverlappingEntries("interval [" + std::to_string(interval.start()) + "," +
                             std::to_string(interval.end()) + ") overlaps a calendar entry");
  }
  entries_.insert(pos, CalendarEntry{interval, kind});
}

bool Calendar::is_free(const TimeInterval& interval) const noexcept {
  return std::none_of(entries_.begin(), entries_.end(),
                      [&](const CalendarEntry& e) { return overlaps(e.interval, interval); });
}

std::optional<Tick> Calendar::latest_end_at_or_before(Tick t) const noexcept {
  // Entries are disjoint and sorted by start, so ends are sorted too.
  std::optional<Tick> best;
  for (const auto& e : entries_) {
    if (e.interval.end() > t) break;
    best = e.interval.end();
  }
  return best;
}

std::vector<TimeInterval> free_gaps(std::span<const TimeInterval> busy,
                                    const TimeInterval& window) {
  std::vector<TimeInterval> clipped;
  clipped.reserve(busy.size());
  for (const auto& b : busy) {
    if (overlaps(b, window)) {
      clipped.push_back(TimeInterval::make(std::max(b.start(), window.start()),
                                           std::min(b.end(), window.end())));
    }
  }
  std::sort(clipped.begin(), clipped.end(),
            [](const auto& a, const auto& b) { return a.start() < b.start(); });

  std::vector<TimeInterval> gaps;
  Tick cursor = window.start();
  for (const auto& b : clipped) {
    if (b.start() > cursor) gaps.push_back(TimeInterval::make(cursor, b.start()));
    cursor = std::max(cursor, b.end());
  }
  if (cursor < window.end()) gaps.push_back(TimeInterval::make(cursor, window.end()));
  return gaps;
}

std::vector<TimeInterval> free_gaps(std::span<const Calendar> calendars,
                                    const TimeInterval& window) {
  std::vector<TimeInterval> busy;
  for (const auto& c : calendars) {
    for (const auto& e : c.entries()) busy.push_back(e.interval);
  }
  return free_gaps(std::span<const TimeInterval>(busy), window);
}

KnowledgeSpace::KnowledgeSpace(std::size_t n) {
  if (n == 0) throw InvalidConfig("knowledge space needs at least one unit field");
  fields_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    fields_.push_back(UnitField{static_cast<UnitFieldId>(i), "u" + std::to_string(i)});
  }
}

KnowledgeSpace::KnowledgeSpace(std::vector<std::string> labels) {
  if (labels.empty()) throw InvalidConfig("knowledge space needs at least one unit field");
  fields_.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    fields_.push_back(UnitField{static_cast<UnitFieldId>(i), std::move(labels[i])});
  }
}

const UnitField& KnowledgeSpace::at(UnitFieldId id) const {
  if (id >= fields_.size()) {
    throw IndexOutOfRange("unit field " + std::to_string(id) + " outside knowledge space of size " +
                          std::to_string(fields_.size()));
  }
  return fields_[id];
}

EnergyMatrix::EnergyMatrix(std::size_t node_count, std::size_t field_count, Energy e_max)
    : node_count_(node_count),
      field_count_(field_count),
      e_max_(e_max),
      values_(node_count * field_count, 0.0) {
  if (!(e_max > 0.0) || !std::isfinite(e_max)) {
    throw InvalidEnergy("e_max must be a positive finite value");
  }
  if (field_count == 0) throw InvalidConfig("energy matrix needs at least one unit field");
}

std::size_t EnergyMatrix::index(NodeId node, UnitFieldId u) const {
  if (node >= node_count_) {
    throw IndexOutOfRange("node " + std::to_string(node) + " out of range (" +
                          std::to_string(node_count_) + " nodes)");
  }
  if (u >= field_count_) {
    throw IndexOutOfRange("unit field " + std::to_string(u) + " out of range (" +
                          std::to_string(field_count_) + " fields)");
  }
  return static_cast<std::size_t>(node) * field_count_ + u;
}

Energy EnergyMatrix::at(NodeId node, UnitFieldId u) const { return values_[index(node, u)]; }

void EnergyMatrix::set(NodeId node, UnitFieldId u, Energy value) {
  const auto i = index(node, u);
  if (!(value >= 0.0 && value <= e_max_)) {
    throw InvalidEnergy("energy " + std::to_string(value) + " outside [0, e_max]");
  }
  values_[i] = value;
}

Energy EnergyMatrix::mean_energy(NodeId node) const {
  const auto first = values_.begin() + static_cast<std::ptrdiff_t>(index(node, 0));
  return std::accumulate(first, first + static_cast<std::ptrdiff_t>(field_count_), 0.0) /
         static_cast<double>(field_count_);
}

Energy energy_of(const EnergyMatrix& m, NodeId node, UnitFieldId u) { return m.at(node, u); }

}  // namespace kfn
