#pragma once

#include <stdexcept>
#include <string>

namespace edgephase {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input detected before any computation starts (CLI exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Failure raised by a numerical module (CLI exit code 2).
class NumericalError : public Error {
public:
    using Error::Error;
};

#define EDGEPHASE_NUMERICAL_ERROR(Name)                                        \
    class Name : public NumericalError {                                       \
    public:                                                                    \
        explicit Name(const std::string& what) : NumericalError(#Name ": " + what) {} \
    }

EDGEPHASE_NUMERICAL_ERROR(GridTooSmall);
EDGEPHASE_NUMERICAL_ERROR(ConvergenceFailure);
EDGEPHASE_NUMERICAL_ERROR(SingularSystem);
EDGEPHASE_NUMERICAL_ERROR(TailContamination);
EDGEPHASE_NUMERICAL_ERROR(TruncationNotConverged);
EDGEPHASE_NUMERICAL_ERROR(NoCollision);
EDGEPHASE_NUMERICAL_ERROR(BracketFailure);
EDGEPHASE_NUMERICAL_ERROR(CurvatureTooLarge);
EDGEPHASE_NUMERICAL_ERROR(ConfigInvalid);
EDGEPHASE_NUMERICAL_ERROR(PacketOverlapsBend);
EDGEPHASE_NUMERICAL_ERROR(SolveFailure);
EDGEPHASE_NUMERICAL_ERROR(NotAsymptotic);

#undef EDGEPHASE_NUMERICAL_ERROR

}  // namespace edgephase
