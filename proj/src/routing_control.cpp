#include "kfn/routing_control.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "kfn/errors.hpp"

namespace kfn {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MalformedMessage(std::string("missing key \"") + key + "\"");
  return *it;
}

void expect_keys(const json& obj, std::initializer_list<const char*> keys, const char* what) {
  if (!obj.is_object()) throw MalformedMessage(std::string(what) + " is not an object");
  if (obj.size() != keys.size()) {
    throw MalformedMessage(std::string(what) + " has unexpected keys");
  }
  for (const char* k : keys) field(obj, k);
}

std::string get_string(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_string()) throw MalformedMessage(std::string(key) + " is not a string");
  return v.get<std::string>();
}

std::int64_t get_int(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw MalformedMessage(std::string(key) + " out of range");
    }
    return static_cast<std::int64_t>(u);
  }
  if (v.is_number_integer()) return v.get<std::int64_t>();
  throw MalformedMessage(std::string(key) + " is not an integer");
}

std::uint32_t get_id(const json& obj, const char* key) {
  const std::int64_t v = get_int(obj, key);
  if (v < 0 || v > std::numeric_limits<std::uint32_t>::max()) {
    throw MalformedMessage(std::string(key) + " is not a valid id");
  }
  return static_cast<std::uint32_t>(v);
}

bool get_bool(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_boolean()) throw MalformedMessage(std::string(key) + " is not a boolean");
  return v.get<bool>();
}

}  // namespace

std::string encode_control_message(const ControlMessage& msg) {
  msg.validate();
  json hops = json::array();
  for (const Hop& h : msg.hops) {
    hops.push_back(json{{"access_end", h.access_end},
                        {"access_start", h.access_start},
                        {"node", h.node},
                        {"permission", h.permission}});
  }
  // nlohmann::json objects are std::map-backed, so keys serialize sorted.
  const json doc{{"deadline", msg.deadline},     {"flow_id", msg.flow_id},
                 {"hops", std::move(hops)},       {"knowledge_link", msg.knowledge_link},
                 {"problem", msg.problem},        {"recipient", msg.recipient},
                 {"unit_field", msg.unit_field}};
  try {
    return doc.dump() + '\n';
  } catch (const json::type_error& ex) {
    throw InvalidMessage(std::string("text field is not valid UTF-8: ") + ex.what());
  }
}

ControlMessage decode_control_message(std::string_view bytes) {
  if (bytes.empty() || bytes.back() != '\n') {
    throw MalformedMessage("message is not newline-terminated");
  }
  bytes.remove_suffix(1);
  if (bytes.find('\n') != std::string_view::npos) {
    throw MalformedMessage("message spans more than one line");
  }

  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& ex) {
    throw MalformedMessage(ex.what());
  }

  expect_keys(doc,
              {"deadline", "flow_id", "hops", "knowledge_link", "problem", "recipient",
               "unit_field"},
              "message");
  ControlMessage msg{.flow_id = get_string(doc, "flow_id"),
                     .recipient = get_id(doc, "recipient"),
                     .knowledge_link = get_string(doc, "knowledge_link"),
                     .unit_field = get_id(doc, "unit_field"),
                     .problem = get_string(doc, "problem"),
                     .deadline = get_int(doc, "deadline"),
                     .hops = {}};
  const json& hops = field(doc, "hops");
  if (!hops.is_array()) throw MalformedMessage("hops is not an array");
  for (const json& h : hops) {
    expect_keys(h, {"access_end", "access_start", "node", "permission"}, "hop");
    msg.hops.push_back(Hop{.node = get_id(h, "node"),
                           .access_start = get_int(h, "access_start"),
                           .access_end = get_int(h, "access_end"),
                           .permission = get_bool(h, "permission")});
  }
  msg.validate();
  return msg;
}

NodeId next_destination(const ControlMessage& msg, NodeId current) {
  const auto at = msg.hop_index(current);
  const std::size_t next = at ? *at + 1 : 0;
  return next < msg.hops.size() ? msg.hops[next].node : msg.recipient;
}

double improve_quality(double q, Energy node_e, Energy recipient_e, Energy e_max, double beta) {
  if (!(node_e > recipient_e)) {
    throw InvalidGain("improving node must hold more energy than the recipient");
  }
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidGain("beta must lie in (0, 1]");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidGain("quality must lie in [0, 1]");
  const double gap = std::min(1.0, (node_e - recipient_e) / e_max);
  return std::clamp(q + beta * gap * (1.0 - q), q, 1.0);
}

const Hop& RoutingAgent::own_hop(const ControlMessage& msg) const {
  const auto at = msg.hop_index(node_);
  if (!at) {
    throw NotOnPath("node " + std::to_string(node_) + " is not on the path of " + msg.flow_id);
  }
  return msg.hops[*at];
}

Forward RoutingAgent::forward(FlowingKnowledge packet) const {
  const NodeId to = next_destination(packet.message, node_);
  return Forward{to, std::move(packet)};
}

ReceiveOutcome RoutingAgent::on_receive(FlowingKnowledge packet, Tick now) {
  if (packet.message.recipient == node_) {
    return {ReceiveResult::DeliveredToRecipient, std::nullopt};
  }
  const Hop hop = own_hop(packet.message);
  if (!hop.permission || now >= hop.access_end) {
    return {ReceiveResult::ForwardedImmediately, forward(std::move(packet))};
  }
  auto pos = std::upper_bound(queue_.begin(), queue_.end(), hop.access_start,
                              [&](Tick start, const FlowingKnowledge& queued) {
                                return start < own_hop(queued.message).access_start;
                              });
  queue_.insert(pos, std::move(packet));
  return {ReceiveResult::Enqueued, std::nullopt};
}

std::vector<AgentEvent> RoutingAgent::tick(Tick now, const ImprovementEnv& env, Rng& rng) {
  std::vector<AgentEvent> events;

  if (active_) {
    Active& a = *active_;
    const double before = a.packet.item.quality;
    if (a.finish_at <= now && a.finish_at <= a.hop.access_end) {
      const auto u = a.packet.message.unit_field;
      const Energy mine = env.energies.at(node_, u);
      const Energy theirs = env.energies.at(a.packet.message.recipient, u);
      if (mine > theirs) {
        a.packet.item.quality =
            improve_quality(before, mine, theirs, env.energies.e_max(), env.beta);
      }
      events.push_back(AgentEvent{.kind = AgentEventKind::FinishedAndForwarded,
                                  .at = now,
                                  .flow_id = a.packet.message.flow_id,
                                  .started = a.started,
                                  .quality_before = before,
                                  .quality_after = a.packet.item.quality,
                                  .forward = forward(std::move(a.packet))});
      active_.reset();
    } else if (now >= a.hop.access_end) {
      // Out of time: pass the knowledge on as it was.
      events.push_back(AgentEvent{.kind = AgentEventKind::AbortedAndForwarded,
                                  .at = now,
                                  .flow_id = a.packet.message.flow_id,
                                  .started = a.started,
                                  .quality_before = before,
                                  .quality_after = before,
                                  .forward = forward(std::move(a.packet))});
      active_.reset();
    }
  }

  // Items whose window closed while waiting are passed on untouched.
  for (auto it = queue_.begin(); it != queue_.end();) {
    if (now >= own_hop(it->message).access_end) {
      const double q = it->item.quality;
      events.push_back(AgentEvent{.kind = AgentEventKind::AbortedAndForwarded,
                                  .at = now,
                                  .flow_id = it->message.flow_id,
                                  .started = std::nullopt,
                                  .quality_before = q,
                                  .quality_after = q,
                                  .forward = forward(std::move(*it))});
      it = queue_.erase(it);
    } else {
      ++it;
    }
  }

  if (!active_ && !queue_.empty()) {
    const Hop hop = own_hop(queue_.front().message);
    if (hop.access_start <= now && now < hop.access_end) {
      const double factor = rng.uniform(0.7, 1.3);
      const auto duration =
          std::max<Tick>(1, static_cast<Tick>(std::ceil(env.erts.ert(node_) * factor)));
      active_ = Active{std::move(queue_.front()), hop, now, now + duration};
      queue_.erase(queue_.begin());
      const double q = active_->packet.item.quality;
      events.push_back(AgentEvent{.kind = AgentEventKind::StartedImprovement,
                                  .at = now,
                                  .flow_id = active_->packet.message.flow_id,
                                  .started = now,
                                  .quality_before = q,
                                  .quality_after = q,
                                  .forward = std::nullopt});
    }
  }

  if (events.empty()) {
    AgentEvent idle;
    idle.at = now;
    events.push_back(std::move(idle));
  }
  return events;
}

FlowOutcome execute_flow(const ControlMessage& msg, KnowledgeItem item,
                         std::map<NodeId, RoutingAgent>& agents, const ImprovementEnv& env,
                         Tick now, Rng& rng) {
  msg.validate();
  auto require_agent = [&](NodeId n) {
    if (!agents.contains(n)) throw IndexOutOfRange("no routing agent for node " + std::to_string(n));
  };
  for (const Hop& h : msg.hops) require_agent(h.node);
  require_agent(msg.recipient);

  FlowOutcome out;
  out.initial_quality = item.quality;
  out.final_quality = item.quality;

  bool done = false;
  std::deque<Forward> pending;
  const NodeId first = msg.hops.empty() ? msg.recipient : msg.hops.front().node;
  pending.push_back(Forward{first, FlowingKnowledge{std::move(item), msg}});

  auto deliver = [&](Tick time) {
    while (!pending.empty()) {
      Forward fw = std::move(pending.front());
      pending.pop_front();
      const double q = fw.packet.item.quality;
      ReceiveOutcome r = agents.at(fw.to).on_receive(std::move(fw.packet), time);
      switch (r.result) {
        case ReceiveResult::DeliveredToRecipient:
          done = true;
          out.delivery_time = time;
          out.final_quality = q;
          out.delivered = time <= msg.deadline;
          break;
        case ReceiveResult::ForwardedImmediately:
          out.hop_log.push_back(HopRecord{.node = fw.to,
                                          .outcome = HopOutcome::PassedThrough,
                                          .started = std::nullopt,
                                          .ended = time,
                                          .quality_before = q,
                                          .quality_after = q});
          pending.push_back(std::move(*r.forward));
          break;
        case ReceiveResult::Enqueued:
          break;
      }
    }
  };

  // Every hop hands the knowledge on by its window end at the latest.
  const Tick limit = std::max(now, msg.deadline) + 1;
  for (Tick time = now; !done; ++time) {
    if (time > limit) throw std::logic_error("flow " + msg.flow_id + " was never delivered");
    deliver(time);
    while (!done) {
      for (auto& [id, agent] : agents) {
        for (AgentEvent& ev : agent.tick(time, env, rng)) {
          if (ev.flow_id != msg.flow_id || !ev.forward) continue;
          out.hop_log.push_back(HopRecord{
              .node = id,
              .outcome = ev.kind == AgentEventKind::FinishedAndForwarded ? HopOutcome::Finished
                                                                        : HopOutcome::Aborted,
              .started = ev.started,
              .ended = ev.at,
              .quality_before = ev.quality_before,
              .quality_after = ev.quality_after});
          pending.push_back(std::move(*ev.forward));
        }
      }
      if (pending.empty()) break;
      deliver(time);
    }
  }
  return out;
}

}  // namespace kfn
