#pragma once

#include <stdexcept>
#include <string>

namespace kfn {

// Base of every error raised by the library. Each failure mode named in the
// module contracts has its own type so callers can catch precisely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define KFN_DEFINE_ERROR(Name, Base)    \
  class Name : public Base {            \
   public:                              \
    using Base::Base;                   \
  }

// core-model
KFN_DEFINE_ERROR(InvalidInterval, Error);
KFN_DEFINE_ERROR(EmptyInterval, InvalidInterval);
KFN_DEFINE_ERROR(OverlappingEntries, Error);
KFN_DEFINE_ERROR(IndexOutOfRange, Error);
KFN_DEFINE_ERROR(InvalidEnergy, Error);

// strategies
KFN_DEFINE_ERROR(NoCandidates, Error);
KFN_DEFINE_ERROR(NoAvailableNode, Error);

// kfn-simulator
KFN_DEFINE_ERROR(InvalidConfig, Error);
KFN_DEFINE_ERROR(InvalidUpdate, Error);
KFN_DEFINE_ERROR(InvalidTransition, Error);

// erta
KFN_DEFINE_ERROR(InvalidObservation, Error);

// flow-scheduler
KFN_DEFINE_ERROR(InvalidRequest, Error);
KFN_DEFINE_ERROR(FlowListViolation, Error);
KFN_DEFINE_ERROR(CompactionViolation, Error);

// routing-control
KFN_DEFINE_ERROR(MalformedMessage, Error);
KFN_DEFINE_ERROR(InvalidMessage, Error);
KFN_DEFINE_ERROR(NotOnPath, Error);
KFN_DEFINE_ERROR(InvalidGain, Error);

// cli-harness
KFN_DEFINE_ERROR(ParseError, Error);
KFN_DEFINE_ERROR(IoError, Error);

#undef KFN_DEFINE_ERROR

// Carries the dotted path of the offending scenario field, e.g.
// "sim.capacity_per_slot".
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace kfn
