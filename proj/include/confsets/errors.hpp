#pragma once

#include <stdexcept>
#include <string>

namespace confsets {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CONFSETS_DEFINE_ERROR(Name)            \
  class Name : public Error {                  \
   public:                                     \
    explicit Name(const std::string& what)     \
        : Error(std::string(#Name ": ") + what) {} \
  };

CONFSETS_DEFINE_ERROR(SingularDesign)
CONFSETS_DEFINE_ERROR(DimensionMismatch)
CONFSETS_DEFINE_ERROR(DomainError)
CONFSETS_DEFINE_ERROR(NotNested)
CONFSETS_DEFINE_ERROR(DegenerateDf)
CONFSETS_DEFINE_ERROR(DegenerateProjection)
CONFSETS_DEFINE_ERROR(InsufficientData)
CONFSETS_DEFINE_ERROR(NumericalError)
CONFSETS_DEFINE_ERROR(ScreenerFailure)
CONFSETS_DEFINE_ERROR(SeparationError)
CONFSETS_DEFINE_ERROR(InputError)

#undef CONFSETS_DEFINE_ERROR

}  // namespace confsets
