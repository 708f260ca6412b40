#pragma once

#include <stdexcept>
#include <string>

namespace pe {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PE_DEFINE_ERROR(Name)                  \
  class Name : public Error {                  \
   public:                                     \
    using Error::Error;                        \
  };

PE_DEFINE_ERROR(PoleError)
PE_DEFINE_ERROR(RangeError)
PE_DEFINE_ERROR(DomainError)
PE_DEFINE_ERROR(ConvergenceError)
PE_DEFINE_ERROR(OverflowError)
PE_DEFINE_ERROR(NoSoftEdgeError)
PE_DEFINE_ERROR(BranchPointError)
PE_DEFINE_ERROR(SingularityError)
PE_DEFINE_ERROR(GeometryError)
PE_DEFINE_ERROR(PoleClearanceError)
PE_DEFINE_ERROR(IllConditionedError)
PE_DEFINE_ERROR(SingularFactorError)
PE_DEFINE_ERROR(ValidationError)

#undef PE_DEFINE_ERROR

}  // namespace pe
