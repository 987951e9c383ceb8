#pragma once

#include <stdexcept>
#include <string>

namespace maxqed {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MAXQED_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

// materials
MAXQED_DEFINE_ERROR(ValidationError);
MAXQED_DEFINE_ERROR(PoleAtFrequency);
MAXQED_DEFINE_ERROR(NegativeRadicand);
MAXQED_DEFINE_ERROR(GridTooCoarse);
// pvquad
MAXQED_DEFINE_ERROR(PoleOnBoundary);
MAXQED_DEFINE_ERROR(DegeneratePair);
// green1d
MAXQED_DEFINE_ERROR(BranchAmbiguity);
MAXQED_DEFINE_ERROR(SingularOperator);
MAXQED_DEFINE_ERROR(GridMismatch);
// tdsim
MAXQED_DEFINE_ERROR(PulseOverlapsMaterial);
MAXQED_DEFINE_ERROR(StabilityViolation);
MAXQED_DEFINE_ERROR(NotSteadyState);

#undef MAXQED_DEFINE_ERROR

}  // namespace maxqed
