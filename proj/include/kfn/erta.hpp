#pragma once

#include <cstddef>
#include <vector>

#include "kfn/core_model.hpp"

namespace kfn {

// alpha * observed + (1 - alpha) * current. Throws InvalidObservation when
// observed <= 0 or alpha is outside (0, 1].
double ema_update(double current, double observed, double alpha);

// Effective response time per node, smoothed by an exponential moving
// average of observed response times.
class ErtStore {
 public:
  // Throws InvalidObservation unless 0 < alpha <= 1 and default_ert > 0.
  ErtStore(std::size_t node_count, double alpha = 0.3, double default_ert = 3.0);

  std::size_t node_count() const noexcept { return ert_.size(); }
  double alpha() const noexcept { return alpha_; }
  double default_ert() const noexcept { return default_ert_; }

  // Throws IndexOutOfRange.
  double ert(NodeId node) const;
  // ERT rounded up to whole ticks (at least one), as used for interval
  // durations.
  Tick ert_ticks(NodeId node) const;
  std::size_t observations(NodeId node) const;

  // Throws IndexOutOfRange, InvalidObservation.
  void record(NodeId node, double observed);

 private:
  void check(NodeId node) const;

  double alpha_;
  double default_ert_;
  std::vector<double> ert_;
  std::vector<std::size_t> observations_;
};

// Value-returning form of ErtStore::record.
ErtStore record_response(const ErtStore& store, NodeId node, double observed);

}  // namespace kfn
