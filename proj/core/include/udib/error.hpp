#ifndef UDIB_ERROR_HPP
#define UDIB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace udib {

/// Failure categories raised by the library. Every throw site in udib uses
/// one of these so callers (the CLI in particular) can map them to exit codes.
enum class ErrorCode {
    // corpus ingestion
    MalformedRecord,
    DimensionMismatch,
    NonFiniteValue,
    DuplicateId,
    UnknownRole,
    EmptyCorpus,
    DegenerateCorpus,
    // clustering
    LengthMismatch,
    NoClusters,
    InvalidConfig,
    // model selection
    CurveTooShort,
    NoEligiblePoint,
    EmptyInput,
    NoRecommendation,
    // divergence metrics
    EmptySelection,
    KMismatch,
    SupportViolation,
    NoPairs,
    NotNormalized,
    MissingRole,
    // files
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace udib

#endif  // UDIB_ERROR_HPP
