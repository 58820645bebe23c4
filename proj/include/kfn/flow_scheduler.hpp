#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kfn/core_model.hpp"
#include "kfn/erta.hpp"

namespace kfn {

struct ScheduleRequest {
  NodeId recipient = 0;
  UnitFieldId unit_field = 0;
  std::string knowledge_link;
  std::string problem;
  Tick now = 0;
  Tick time_constraint = 0;
  std::vector<NodeId> candidates;

  Tick deadline() const noexcept { return now + time_constraint; }
  // [now, now + time_constraint). Throws InvalidRequest.
  TimeInterval window() const;
  // Throws InvalidRequest: non-positive time constraint, negative now,
  // recipient among the candidates, or a repeated candidate.
  void validate() const;
};

struct FlowEntry {
  NodeId node;
  TimeInterval interval;

  friend bool operator==(const FlowEntry&, const FlowEntry&) = default;
};

// Working list of (node, processing interval) allocations for one flow, in
// allocation order until sorted. Intervals stay pairwise disjoint and inside
// the flow window; a node appears at most once.
class FlowList {
 public:
  explicit FlowList(const TimeInterval& window) : window_(window) {}

  const TimeInterval& window() const noexcept { return window_; }
  std::span<const FlowEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains(NodeId node) const noexcept;
  std::vector<TimeInterval> intervals() const;

  // Throws FlowListViolation if an invariant would break.
  void add(NodeId node, const TimeInterval& interval);
  // Moves entry i to start at new_start, keeping its length. Throws
  // FlowListViolation if an invariant would break.
  void reposition(std::size_t i, Tick new_start);
  void sort_by_start();

  friend bool operator==(const FlowList&, const FlowList&) = default;

 private:
  bool fits(const TimeInterval& interval, std::optional<std::size_t> ignore) const;

  TimeInterval window_;
  std::vector<FlowEntry> entries_;
};

struct Hop {
  NodeId node = 0;
  Tick access_start = 0;
  Tick access_end = 0;
  bool permission = false;

  friend bool operator==(const Hop&, const Hop&) = default;
};

// Routing instruction for one flow. A hop without permission carries a
// zero-length window.
struct ControlMessage {
  std::string flow_id;
  NodeId recipient = 0;
  std::string knowledge_link;
  UnitFieldId unit_field = 0;
  std::string problem;
  Tick deadline = 0;
  std::vector<Hop> hops;

  // Throws InvalidMessage: empty flow id, negative times, windows past the
  // deadline, hops not sorted by access_start, permission inconsistent with
  // window length, a node repeated or equal to the recipient.
  void validate() const;

  // Index of node's hop, if present.
  std::optional<std::size_t> hop_index(NodeId node) const noexcept;

  friend bool operator==(const ControlMessage&, const ControlMessage&) = default;
};

// Candidates strictly above the recipient's energy in the request's unit
// field, highest first, ties to the lower id.
std::vector<NodeId> filter_candidates(const ScheduleRequest& req, const EnergyMatrix& m);

// Latest `duration`-tick interval inside `window` that avoids both the busy
// calendar and every interval already in the flow list.
std::optional<TimeInterval> allocate_latest(const Calendar& busy, const FlowList& kfl,
                                            const TimeInterval& window, Tick duration);

// Pulls each allocation earlier, entry by entry in allocation order. For an
// entry [s, s+d) of node k, let e be the latest end <= s among k's calendar
// entries (or t) and f the latest end <= s among the other flow intervals (or
// t). With slack s - e < d the entry moves to max(e, f); otherwise to
// max(e + floor((s - e) / d) * d, f). The first `pinned` entries in allocation
// order stay put. The result is sorted by start. Throws CompactionViolation
// if a move would break an invariant, and IndexOutOfRange when a node has no
// calendar.
FlowList compact_schedule(const FlowList& kfl, std::span<const Calendar> calendars, Tick t,
                          std::size_t pinned = 0);

// True iff energies in u are non-decreasing along the list in start order.
bool flow_order_principle(const FlowList& kfl, const EnergyMatrix& m, UnitFieldId u);

// Path finder with its flow-history ledger. Each node's calendar holds its
// task intervals plus the knowledge-processing intervals of earlier flows.
// Single owner: calls must be serialized.
class FlowScheduler {
 public:
  explicit FlowScheduler(std::size_t node_count);
  explicit FlowScheduler(std::vector<Calendar> calendars);

  // Ranks candidates by energy, gives each the latest free interval of
  // ceil(ERT) ticks scanning back from the deadline (skipping nodes that do
  // not fit), compacts the schedule and emits the control message. The
  // highest-energy allocation stays adjacent to its right-aligned slot. The
  // flow is recorded so later calls treat its intervals as busy.
  ControlMessage find_path(const ScheduleRequest& req, const EnergyMatrix& m,
                           const ErtStore& erts);

  std::span<const Calendar> calendars() const noexcept { return calendars_; }
  std::span<const FlowList> history() const noexcept { return history_; }

 private:
  const Calendar& calendar(NodeId node) const;

  std::vector<Calendar> calendars_;
  std::vector<FlowList> history_;
  std::uint64_t next_flow_ = 1;
};

}  // namespace kfn
