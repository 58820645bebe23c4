#include "kfn/erta.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kfn/errors.hpp"

namespace kfn {

double ema_update(double current, double observed, double alpha) {
  if (!(observed > 0.0) || !std::isfinite(observed)) {
    throw InvalidObservation("observed response time must be positive");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidObservation("smoothing factor must lie in (0, 1]");
  }
  return alpha * observed + (1.0 - alpha) * current;
}

ErtStore::ErtStore(std::size_t node_count, double alpha, double default_ert)
    : alpha_(alpha),
      default_ert_(default_ert),
      ert_(node_count, default_ert),
      observations_(node_count, 0) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidObservation("smoothing factor must lie in (0, 1]");
  }
  if (!(default_ert > 0.0) || !std::isfinite(default_ert)) {
    throw InvalidObservation("default response time must be positive");
  }
}

void ErtStore::check(NodeId node) const {
  if (node >= ert_.size()) {
    throw IndexOutOfRange("node " + std::to_string(node) + " has no response-time record");
  }
}

double ErtStore::ert(NodeId node) const {
  check(node);
  return ert_[node];
}

Tick ErtStore::ert_ticks(NodeId node) const {
  return std::max<Tick>(1, static_cast<Tick>(std::ceil(ert(node))));
}

std::size_t ErtStore::observations(NodeId node) const {
  check(node);
  return observations_[node];
}

void ErtStore::record(NodeId node, double observed) {
  check(node);
  // Before the first observation ert_[node] still holds default_ert.
  const double next = ema_update(ert_[node], observed, alpha_);
  // Both inputs are positive, so the average is too; guard denormal underflow.
  ert_[node] = next > 0.0 ? next : std::min(ert_[node], observed);
  ++observations_[node];
}

ErtStore record_response(const ErtStore& store, NodeId node, double observed) {
  ErtStore out = store;
  out.record(node, observed);
  return out;
}

}  // namespace kfn
