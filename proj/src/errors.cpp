#include "bbeval/errors.hpp"

namespace bbeval {

const char *to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::IntegralityViolation: return "IntegralityViolation";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::BudgetExhausted: return "BudgetExhausted";
    case ErrorKind::AdapterFailure: return "AdapterFailure";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::OutOfOrderObservation: return "OutOfOrderObservation";
    case ErrorKind::EmptyRun: return "EmptyRun";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::SampleTooSmall: return "SampleTooSmall";
    case ErrorKind::ExactModeWithTies: return "ExactModeWithTies";
    case ErrorKind::MismatchedSamples: return "MismatchedSamples";
    case ErrorKind::DuplicateFunction: return "DuplicateFunction";
    case ErrorKind::MissingMetric: return "MissingMetric";
    case ErrorKind::FatalConfigError: return "FatalConfigError";
    case ErrorKind::ManifestMismatch: return "ManifestMismatch";
    case ErrorKind::UnknownMethod: return "UnknownMethod";
    case ErrorKind::NoComparableFunctions: return "NoComparableFunctions";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::UnknownFunction: return "UnknownFunction";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string &message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

} // namespace bbeval
