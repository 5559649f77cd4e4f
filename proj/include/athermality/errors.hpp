#pragma once

#include <stdexcept>
#include <string>

namespace athermality {

// Base for every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ATHERMALITY_DEFINE_ERROR(Name)   \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

ATHERMALITY_DEFINE_ERROR(NonHermitianInput);
ATHERMALITY_DEFINE_ERROR(InvalidState);
ATHERMALITY_DEFINE_ERROR(DomainError);
ATHERMALITY_DEFINE_ERROR(DimensionMismatch);
ATHERMALITY_DEFINE_ERROR(DimensionTooLarge);
ATHERMALITY_DEFINE_ERROR(NotCPTP);
ATHERMALITY_DEFINE_ERROR(InvalidDims);
ATHERMALITY_DEFINE_ERROR(SigmaNotFullRank);
ATHERMALITY_DEFINE_ERROR(AlphaOutOfRange);
ATHERMALITY_DEFINE_ERROR(JointNotGP);
ATHERMALITY_DEFINE_ERROR(MissingWitness);
ATHERMALITY_DEFINE_ERROR(WitnessNotGP);
ATHERMALITY_DEFINE_ERROR(NotCommuting);
ATHERMALITY_DEFINE_ERROR(ConfigError);

#undef ATHERMALITY_DEFINE_ERROR

}  // namespace athermality
