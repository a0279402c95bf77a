#pragma once

#include <stdexcept>
#include <string>

namespace adaptmps {

// Base of every error raised by the library. Subclasses name the violated
// contract so callers and tests can dispatch on the type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ADAPTMPS_DEFINE_ERROR(Name)               \
  class Name : public Error {                     \
   public:                                        \
    explicit Name(const std::string& what)        \
        : Error(std::string(#Name ": ") + what) {} \
  }

// symtensor
ADAPTMPS_DEFINE_ERROR(FusionViolation);
ADAPTMPS_DEFINE_ERROR(ShapeMismatch);
ADAPTMPS_DEFINE_ERROR(UnknownCharge);
ADAPTMPS_DEFINE_ERROR(DirectionMismatch);
ADAPTMPS_DEFINE_ERROR(SectorMismatch);
ADAPTMPS_DEFINE_ERROR(MixedDirectionGroup);
ADAPTMPS_DEFINE_ERROR(LegMismatch);
ADAPTMPS_DEFINE_ERROR(EmptyTensor);
ADAPTMPS_DEFINE_ERROR(InvalidLeg);

// netops
ADAPTMPS_DEFINE_ERROR(EmptyChain);
ADAPTMPS_DEFINE_ERROR(LengthMismatch);
ADAPTMPS_DEFINE_ERROR(PhysicalSectorMismatch);
ADAPTMPS_DEFINE_ERROR(InvalidState);

// models
ADAPTMPS_DEFINE_ERROR(SiteOutOfRange);
ADAPTMPS_DEFINE_ERROR(InvalidParams);
ADAPTMPS_DEFINE_ERROR(NonConservingTerm);
ADAPTMPS_DEFINE_ERROR(NonLocalAsymmetricTerm);

// dmrg / tevo
ADAPTMPS_DEFINE_ERROR(ZeroNormInitial);
ADAPTMPS_DEFINE_ERROR(TruncationBlowup);

// oracle
ADAPTMPS_DEFINE_ERROR(DimensionCap);

// cli
ADAPTMPS_DEFINE_ERROR(ConfigError);

#undef ADAPTMPS_DEFINE_ERROR

}  // namespace adaptmps
