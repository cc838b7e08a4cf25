#pragma once

#include <stdexcept>
#include <string>

namespace bbeval {

enum class ErrorKind {
    DomainViolation,
    IntegralityViolation,
    NotApplicable,
    BudgetExhausted,
    AdapterFailure,
    Timeout,
    OutOfOrderObservation,
    EmptyRun,
    NonFiniteValue,
    LengthMismatch,
    SampleTooSmall,
    ExactModeWithTies,
    MismatchedSamples,
    DuplicateFunction,
    MissingMetric,
    FatalConfigError,
    ManifestMismatch,
    UnknownMethod,
    NoComparableFunctions,
    IoFailure,
    UnknownFunction,
    SchemaMismatch,
};

const char *to_string(ErrorKind kind);

// All library failures are reported through this one exception type; callers
// branch on kind() rather than on a class hierarchy.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace bbeval
