#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kfn {

using Tick = std::int64_t;
using NodeId = std::uint32_t;
using UnitFieldId = std::uint32_t;
using Energy = double;

// Half-open interval [start, end) of integer ticks. Empty intervals cannot be
// constructed.
class TimeInterval {
 public:
  // Throws EmptyInterval if end <= start, InvalidInterval if start < 0.
  static TimeInterval make(Tick start, Tick end);

  Tick start() const noexcept { return start_; }
  Tick end() const noexcept { return end_; }
  Tick length() const noexcept { return end_ - start_; }

  bool contains(Tick t) const noexcept { return start_ <= t && t < end_; }
  bool contains(const TimeInterval& other) const noexcept {
    return start_ <= other.start_ && other.end_ <= end_;
  }

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;

 private:
  TimeInterval(Tick start, Tick end) : start_(start), end_(end) {}

  Tick start_;
  Tick end_;
};

TimeInterval make_interval(Tick start, Tick end);

bool overlaps(const TimeInterval& a, const TimeInterval& b) noexcept;

enum class BusyKind { Task, KnowledgeProcessing };

struct CalendarEntry {
  TimeInterval interval;
  BusyKind kind;

  friend bool operator==(const CalendarEntry&, const CalendarEntry&) = default;
};

// Busy time of one node: task intervals plus knowledge-processing intervals
// handed out by earlier flows. Entries are kept sorted by start and never
// overlap each other.
class Calendar {
 public:
  Calendar() = default;

  // Accepts entries in any order. Throws OverlappingEntries.
  explicit Calendar(std::vector<CalendarEntry> entries);

  // Throws OverlappingEntries if `interval` intersects an existing entry.
  void insert(const TimeInterval& interval, BusyKind kind);

  std::span<const CalendarEntry> entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  bool is_free(const TimeInterval& interval) const noexcept;

  // Largest entry end that is <= t, if any.
  std::optional<Tick> latest_end_at_or_before(Tick t) const noexcept;

  friend bool operator==(const Calendar&, const Calendar&) = default;

 private:
  std::vector<CalendarEntry> entries_;
};

// Maximal free sub-intervals of `window`, sorted by start. Busy intervals may
// overlap each other.
std::vector<TimeInterval> free_gaps(std::span<const TimeInterval> busy,
                                    const TimeInterval& window);
std::vector<TimeInterval> free_gaps(std::span<const Calendar> calendars,
                                    const TimeInterval& window);

struct UnitField {
  UnitFieldId id = 0;
  std::string label;
};

// Flat enumeration of unit fields, ids 0..n-1.
class KnowledgeSpace {
 public:
  // Throws InvalidConfig when n == 0. Labels default to "u<id>".
  explicit KnowledgeSpace(std::size_t n);
  // Throws InvalidConfig when `labels` is empty.
  explicit KnowledgeSpace(std::vector<std::string> labels);

  std::size_t size() const noexcept { return fields_.size(); }
  const UnitField& at(UnitFieldId id) const;
  std::span<const UnitField> fields() const noexcept { return fields_; }

 private:
  std::vector<UnitField> fields_;
};

// node-count x unit-field-count grid of energies in [0, e_max].
class EnergyMatrix {
 public:
  // All entries zero. Throws InvalidEnergy unless e_max > 0.
  EnergyMatrix(std::size_t node_count, std::size_t field_count, Energy e_max);

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t field_count() const noexcept { return field_count_; }
  Energy e_max() const noexcept { return e_max_; }

  // Throws IndexOutOfRange.
  Energy at(NodeId node, UnitFieldId u) const;
  // Throws IndexOutOfRange, or InvalidEnergy when value is outside [0, e_max].
  void set(NodeId node, UnitFieldId u, Energy value);

  // Mean over unit fields; used to rank nodes by a single energy level.
  Energy mean_energy(NodeId node) const;

  friend bool operator==(const EnergyMatrix&, const EnergyMatrix&) = default;

 private:
  std::size_t index(NodeId node, UnitFieldId u) const;

  std::size_t node_count_;
  std::size_t field_count_;
  Energy e_max_;
  std::vector<Energy> values_;
};

Energy energy_of(const EnergyMatrix& m, NodeId node, UnitFieldId u);

}  // namespace kfn
