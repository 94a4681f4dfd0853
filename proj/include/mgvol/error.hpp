#pragma once

#include <stdexcept>
#include <string>

namespace mgvol {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent input. The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not deliver a result. CLI exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

#define MGVOL_DEFINE_ERROR(Name, Base)      \
  class Name : public Base {                \
   public:                                  \
    explicit Name(const std::string& what)  \
        : Base(#Name ": " + what) {}        \
  };

MGVOL_DEFINE_ERROR(ConfigError, InputError)
MGVOL_DEFINE_ERROR(DuplicatePoints, InputError)
MGVOL_DEFINE_ERROR(DegenerateData, InputError)
MGVOL_DEFINE_ERROR(OutOfSupport, InputError)
MGVOL_DEFINE_ERROR(ScaleOutOfRange, InputError)
MGVOL_DEFINE_ERROR(DimensionTooLarge, InputError)
MGVOL_DEFINE_ERROR(GridTooLarge, InputError)
MGVOL_DEFINE_ERROR(CountExceedsNodes, InputError)
MGVOL_DEFINE_ERROR(NotMonotone, InputError)

MGVOL_DEFINE_ERROR(SingularSystem, NumericalError)
MGVOL_DEFINE_ERROR(NotPSD, NumericalError)
MGVOL_DEFINE_ERROR(QuadratureFailure, NumericalError)
MGVOL_DEFINE_ERROR(DegenerateLaw, NumericalError)

#undef MGVOL_DEFINE_ERROR

}  // namespace mgvol
