#include "kfn/flow_scheduler.hpp"

#include <algorithm>
#include <set>

#include "kfn/errors.hpp"

namespace kfn {

TimeInterval ScheduleRequest::window() const {
  validate();
  return TimeInterval::make(now, deadline());
}

void ScheduleRequest::validate() const {
  if (time_constraint <= 0) throw InvalidRequest("time constraint must be positive");
  if (now < 0) throw InvalidRequest("current time must be non-negative");
  std::set<NodeId> seen;
  for (NodeId c : candidates) {
    if (c == recipient) throw InvalidRequest("recipient listed among candidates");
    if (!seen.insert(c).second) {
      throw InvalidRequest("candidate " + std::to_string(c) + " listed twice");
    }
  }
}

bool FlowList::contains(NodeId node) const noexcept {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const FlowEntry& e) { return e.node == node; });
}

std::vector<TimeInterval> FlowList::intervals() const {
  std::vector<TimeInterval> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.interval);
  return out;
}

bool FlowList::fits(const TimeInterval& interval, std::optional<std::size_t> ignore) const {
  if (!window_.contains(interval)) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (ignore && *ignore == i) continue;
    if (overlaps(entries_[i].interval, interval)) return false;
  }
  return true;
}

void FlowList::add(NodeId node, const TimeInterval& interval) {
  if (contains(node)) {
    throw FlowListViolation("node " + std::to_string(node) + " already in the flow");
  }
  if (!fits(interval, std::nullopt)) {
    throw FlowListViolation("interval outside the window or overlapping the flow");
  }
  entries_.push_back(FlowEntry{node, interval});
}

void FlowList::reposition(std::size_t i, Tick new_start) {
  if (i >= entries_.size()) throw IndexOutOfRange("flow entry index out of range");
  const auto moved =
      TimeInterval::make(new_start, new_start + entries_[i].interval.length());
  if (!fits(moved, i)) {
    throw FlowListViolation("repositioned interval breaks the flow invariants");
  }
  entries_[i].interval = moved;
}

void FlowList::sort_by_start() {
  std::sort(entries_.begin(), entries_.end(), [](const FlowEntry& a, const FlowEntry& b) {
    return a.interval.start() < b.interval.start();
  });
}

void ControlMessage::validate() const {
  if (flow_id.empty()) throw InvalidMessage("empty flow id");
  if (deadline < 0) throw InvalidMessage("negative deadline");
  std::set<NodeId> seen;
  for (std::size_t i = 0; i < hops.size(); ++i) {
    const Hop& h = hops[i];
    if (h.access_start < 0 || h.access_end < h.access_start) {
      throw InvalidMessage("hop " + std::to_string(i) + " has an inverted window");
    }
    if (h.access_end > deadline) {
      throw InvalidMessage("hop " + std::to_string(i) + " window ends after the deadline");
    }
    if (h.permission != (h.access_start < h.access_end)) {
      throw InvalidMessage("hop " + std::to_string(i) +
                           " permission does not match its window length");
    }
    if (i > 0 && hops[i - 1].access_start > h.access_start) {
      throw InvalidMessage("hops not sorted by access start");
    }
    if (h.node == recipient) throw InvalidMessage("recipient listed as a hop");
    if (!seen.insert(h.node).second) {
      throw InvalidMessage("node " + std::to_string(h.node) + " appears twice on the path");
    }
  }
}

std::optional<std::size_t> ControlMessage::hop_index(NodeId node) const noexcept {
  for (std::size_t i = 0; i < hops.size(); ++i) {
    if (hops[i].node == node) return i;
  }
  return std::nullopt;
}

std::vector<NodeId> filter_candidates(const ScheduleRequest& req, const EnergyMatrix& m) {
  const Energy floor = m.at(req.recipient, req.unit_field);
  std::vector<NodeId> out;
  for (NodeId c : req.candidates) {
    if (m.at(c, req.unit_field) > floor) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [&](NodeId a, NodeId b) {
    const Energy ea = m.at(a, req.unit_field);
    const Energy eb = m.at(b, req.unit_field);
    return ea != eb ? ea > eb : a < b;
  });
  return out;
}

std::optional<TimeInterval> allocate_latest(const Calendar& busy, const FlowList& kfl,
                                            const TimeInterval& window, Tick duration) {
  if (duration <= 0) throw InvalidRequest("allocation duration must be positive");
  std::vector<TimeInterval> blocked = kfl.intervals();
  for (const auto& e : busy.entries()) blocked.push_back(e.interval);
  const auto gaps = free_gaps(std::span<const TimeInterval>(blocked), window);
  for (auto it = gaps.rbegin(); it != gaps.rend(); ++it) {
    if (it->length() >= duration) return TimeInterval::make(it->end() - duration, it->end());
  }
  return std::nullopt;
}

FlowList compact_schedule(const FlowList& kfl, std::span<const Calendar> calendars, Tick t,
                          std::size_t pinned) {
  FlowList out = kfl;
  for (std::size_t i = pinned; i < out.size(); ++i) {
    const FlowEntry entry = out.entries()[i];
    if (entry.node >= calendars.size()) {
      throw IndexOutOfRange("no calendar for node " + std::to_string(entry.node));
    }
    const Calendar& busy = calendars[entry.node];
    const Tick s = entry.interval.start();
    const Tick d = entry.interval.length();

    const Tick e = std::max(t, busy.latest_end_at_or_before(s).value_or(t));
    Tick f = t;
    for (std::size_t j = 0; j < out.size(); ++j) {
      const Tick end = out.entries()[j].interval.end();
      if (j != i && end <= s) f = std::max(f, end);
    }

    const Tick slack = s - e;
    const Tick moved = slack < d ? std::max(e, f) : std::max(e + (slack / d) * d, f);
    if (moved > s) throw CompactionViolation("compaction would move an interval later");
    if (moved == s) continue;

    if (!busy.is_free(TimeInterval::make(moved, moved + d))) {
      throw CompactionViolation("compaction would overlap the node's busy time");
    }
    try {
      out.reposition(i, moved);
    } catch (const FlowListViolation& ex) {
      throw CompactionViolation(ex.what());
    }
  }
  out.sort_by_start();
  return out;
}

bool flow_order_principle(const FlowList& kfl, const EnergyMatrix& m, UnitFieldId u) {
  FlowList sorted = kfl;
  sorted.sort_by_start();
  const auto entries = sorted.entries();
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (m.at(entries[i - 1].node, u) > m.at(entries[i].node, u)) return false;
  }
  return true;
}

FlowScheduler::FlowScheduler(std::size_t node_count) : calendars_(node_count) {}

FlowScheduler::FlowScheduler(std::vector<Calendar> calendars)
    : calendars_(std::move(calendars)) {}

const Calendar& FlowScheduler::calendar(NodeId node) const {
  if (node >= calendars_.size()) {
    throw IndexOutOfRange("no calendar for node " + std::to_string(node));
  }
  return calendars_[node];
}

ControlMessage FlowScheduler::find_path(const ScheduleRequest& req, const EnergyMatrix& m,
                                        const ErtStore& erts) {
  const TimeInterval window = req.window();

  FlowList kfl(window);
  for (NodeId k : filter_candidates(req, m)) {
    if (auto slot = allocate_latest(calendar(k), kfl, window, erts.ert_ticks(k))) {
      kfl.add(k, *slot);
    }
  }
  kfl = compact_schedule(kfl, calendars_, req.now, /*pinned=*/1);

  ControlMessage msg{.flow_id = "flow-" + std::to_string(next_flow_++),
                     .recipient = req.recipient,
                     .knowledge_link = req.knowledge_link,
                     .unit_field = req.unit_field,
                     .problem = req.problem,
                     .deadline = req.deadline(),
                     .hops = {}};
  for (const auto& e : kfl.entries()) {
    msg.hops.push_back(Hop{.node = e.node,
                           .access_start = e.interval.start(),
                           .access_end = e.interval.end(),
                           .permission = true});
    calendars_[e.node].insert(e.interval, BusyKind::KnowledgeProcessing);
  }
  history_.push_back(std::move(kfl));
  return msg;
}

}  // namespace kfn
