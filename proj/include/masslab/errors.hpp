#pragma once
// Error types shared by every module. The CLI maps them onto exit codes.

#include <stdexcept>
#include <string>

namespace masslab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Validation family: bad input or a request that cannot be honoured.
struct ValidationError : Error { using Error::Error; };
struct NotApplicable : ValidationError { using ValidationError::ValidationError; };
struct NoFiniteMassSelfSimilar : ValidationError { using ValidationError::ValidationError; };
struct PreconditionFailed : ValidationError {
    PreconditionFailed(std::string cond, const std::string& what)
        : ValidationError(cond + ": " + what), condition(std::move(cond)) {}
    std::string condition;
};
struct RangeError : ValidationError { using ValidationError::ValidationError; };
struct TimeWindowError : ValidationError { using ValidationError::ValidationError; };

// Numerical family: the computation itself went wrong.
struct NumericalError : Error { using Error::Error; };
struct DivergentMass : NumericalError { using NumericalError::NumericalError; };
struct ResolutionError : NumericalError { using NumericalError::NumericalError; };
struct StepRejected : NumericalError { using NumericalError::NumericalError; };

enum ExitCode : int { kExitPass = 0, kExitValidation = 1, kExitCriterion = 2, kExitNumerical = 3 };

}  // namespace masslab
