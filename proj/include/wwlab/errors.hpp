#pragma once

#include <stdexcept>
#include <string>

namespace wwlab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define WWLAB_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what)                          \
        : Error(std::string(#Name ": ") + what) {}                  \
    const char* kind() const noexcept override { return #Name; }    \
  }

WWLAB_DEFINE_ERROR(MalformedSpec);
WWLAB_DEFINE_ERROR(OrbitEscape);
WWLAB_DEFINE_ERROR(UnknownCell);
WWLAB_DEFINE_ERROR(NonIntegrableObservable);
WWLAB_DEFINE_ERROR(NotInRmu);
WWLAB_DEFINE_ERROR(QuadratureTooCoarse);
WWLAB_DEFINE_ERROR(NoKroneckerModel);
WWLAB_DEFINE_ERROR(DimensionMismatch);
WWLAB_DEFINE_ERROR(NotFiniteSystem);
WWLAB_DEFINE_ERROR(InsufficientCheckpoints);
WWLAB_DEFINE_ERROR(ConfigError);

#undef WWLAB_DEFINE_ERROR

}  // namespace wwlab
