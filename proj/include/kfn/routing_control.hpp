#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kfn/core_model.hpp"
#include "kfn/erta.hpp"
#include "kfn/flow_scheduler.hpp"
#include "kfn/rng.hpp"

namespace kfn {

// Canonical wire form: one UTF-8 JSON document with lexicographically sorted
// keys, no insignificant whitespace, integers in decimal, and a single
// trailing newline. Throws InvalidMessage if `msg` breaks an invariant.
std::string encode_control_message(const ControlMessage& msg);

// Throws MalformedMessage for bad syntax or schema (missing or unknown keys,
// wrong types, missing newline) and InvalidMessage for invariant violations.
ControlMessage decode_control_message(std::string_view bytes);

struct KnowledgeItem {
  std::string link;
  UnitFieldId unit_field = 0;
  double quality = 0.0;  // [0, 1]

  friend bool operator==(const KnowledgeItem&, const KnowledgeItem&) = default;
};

// Knowledge in transit together with the control message that routes it.
struct FlowingKnowledge {
  KnowledgeItem item;
  ControlMessage message;
};

struct Forward {
  NodeId to;
  FlowingKnowledge packet;
};

// Next stop after `current`: the following hop, or the recipient after the
// last hop. A node that is not on the path (the source) sends to the first
// hop.
NodeId next_destination(const ControlMessage& msg, NodeId current);

// q + beta * ((node_e - recipient_e) / e_max) * (1 - q), which stays in
// [q, 1]. Throws InvalidGain when node_e <= recipient_e, beta is outside
// (0, 1] or q outside [0, 1].
double improve_quality(double q, Energy node_e, Energy recipient_e, Energy e_max, double beta);

enum class ReceiveResult { Enqueued, ForwardedImmediately, DeliveredToRecipient };

struct ReceiveOutcome {
  ReceiveResult result;
  std::optional<Forward> forward;  // set for ForwardedImmediately
};

enum class AgentEventKind { StartedImprovement, FinishedAndForwarded, AbortedAndForwarded, Idle };

struct AgentEvent {
  AgentEventKind kind = AgentEventKind::Idle;
  Tick at = 0;
  std::string flow_id;
  std::optional<Tick> started;  // unset when an item expired before starting
  double quality_before = 0.0;
  double quality_after = 0.0;
  std::optional<Forward> forward;  // set for *AndForwarded
};

// What an agent needs to run improvements: energies for the gain, ERTs for
// the processing-time estimate.
struct ImprovementEnv {
  const EnergyMatrix& energies;
  const ErtStore& erts;
  double beta = 0.5;
};

// Per-node routing control. Holds a queue of flowing knowledge ordered by this
// node's access start and at most one improvement in progress.
class RoutingAgent {
 public:
  explicit RoutingAgent(NodeId node) : node_(node) {}

  NodeId node() const noexcept { return node_; }
  std::span<const FlowingKnowledge> queue() const noexcept { return queue_; }
  bool busy() const noexcept { return active_.has_value(); }

  // Delivered if this node is the recipient; queued if it holds a permitted
  // window that has not closed yet; otherwise passed on at once. Throws
  // NotOnPath.
  ReceiveOutcome on_receive(FlowingKnowledge packet, Tick now);

  // Advances this agent to `now`: completes or aborts the active improvement,
  // forwards queued items whose window closed, and starts the queue head once
  // its window opens. Processing time is ceil(ERT * factor), factor uniform in
  // [0.7, 1.3). Work that completes by the window end counts as finished.
  std::vector<AgentEvent> tick(Tick now, const ImprovementEnv& env, Rng& rng);

 private:
  struct Active {
    FlowingKnowledge packet;
    Hop hop;
    Tick started;
    Tick finish_at;
  };

  const Hop& own_hop(const ControlMessage& msg) const;
  Forward forward(FlowingKnowledge packet) const;

  NodeId node_;
  std::vector<FlowingKnowledge> queue_;
  std::optional<Active> active_;
};

enum class HopOutcome { Finished, Aborted, PassedThrough };

struct HopRecord {
  NodeId node = 0;
  HopOutcome outcome = HopOutcome::PassedThrough;
  std::optional<Tick> started;
  Tick ended = 0;
  double quality_before = 0.0;
  double quality_after = 0.0;
};

struct FlowOutcome {
  bool delivered = false;  // reached the recipient by the deadline
  Tick delivery_time = 0;
  double initial_quality = 0.0;
  double final_quality = 0.0;
  std::vector<HopRecord> hop_log;
};

// Drives the flow tick by tick from the source through every hop to the
// recipient. Agents are advanced in node-id order; forwards are delivered
// within the same tick. Throws InvalidMessage, or IndexOutOfRange when a hop
// or the recipient has no agent.
FlowOutcome execute_flow(const ControlMessage& msg, KnowledgeItem item,
                         std::map<NodeId, RoutingAgent>& agents, const ImprovementEnv& env,
                         Tick now, Rng& rng);

}  // namespace kfn
