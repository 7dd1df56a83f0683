#pragma once

#include <stdexcept>
#include <string>

namespace twinflow {

// Thin exception taxonomy; each type carries a human-readable message.
#define TWINFLOW_DEFINE_ERROR(Name)                       \
  struct Name : std::runtime_error {                      \
    explicit Name(const std::string& what)                \
        : std::runtime_error(std::string(#Name ": ") + what) {} \
  }

TWINFLOW_DEFINE_ERROR(DimensionMismatch);
TWINFLOW_DEFINE_ERROR(NumericalBreakdown);
TWINFLOW_DEFINE_ERROR(InfeasibleFixing);
TWINFLOW_DEFINE_ERROR(ZeroDistance);
TWINFLOW_DEFINE_ERROR(ZeroRateWhileConnected);
TWINFLOW_DEFINE_ERROR(ZeroAllocationWithWork);
TWINFLOW_DEFINE_ERROR(EmptyCandidateSet);
TWINFLOW_DEFINE_ERROR(AllZeroCounts);
TWINFLOW_DEFINE_ERROR(WrongSampleCount);
TWINFLOW_DEFINE_ERROR(IndexOutOfRange);
TWINFLOW_DEFINE_ERROR(EmptyBuffer);
TWINFLOW_DEFINE_ERROR(EmptyRun);
TWINFLOW_DEFINE_ERROR(IoError);
TWINFLOW_DEFINE_ERROR(ParseError);
TWINFLOW_DEFINE_ERROR(ValidationError);

#undef TWINFLOW_DEFINE_ERROR

}  // namespace twinflow
