#ifndef ROBUST_ASSOC_ERROR_HPP
#define ROBUST_ASSOC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace robust_assoc {

enum class ErrorKind {
    NegativeCell,
    EmptyRow,
    NonIntegerCell,
    FrequencyOutOfRange,
    DegeneratePrevalence,
    OrderViolation,
    ZeroVariance,
    DegenerateProportions,
    CorrelationOutOfRange,
    NotExtremePair,
    ZeroMargin,
    MonomorphicSample,
    MismatchedScenario,
    DegenerateTable,
    NotPSD,
    CalibrationFailed,
    UnknownStatistic,
    InvalidScenario,
    ParseError,
    InvalidArgument
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NegativeCell: return "NegativeCell";
    case ErrorKind::EmptyRow: return "EmptyRow";
    case ErrorKind::NonIntegerCell: return "NonIntegerCell";
    case ErrorKind::FrequencyOutOfRange: return "FrequencyOutOfRange";
    case ErrorKind::DegeneratePrevalence: return "DegeneratePrevalence";
    case ErrorKind::OrderViolation: return "OrderViolation";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::DegenerateProportions: return "DegenerateProportions";
    case ErrorKind::CorrelationOutOfRange: return "CorrelationOutOfRange";
    case ErrorKind::NotExtremePair: return "NotExtremePair";
    case ErrorKind::ZeroMargin: return "ZeroMargin";
    case ErrorKind::MonomorphicSample: return "MonomorphicSample";
    case ErrorKind::MismatchedScenario: return "MismatchedScenario";
    case ErrorKind::DegenerateTable: return "DegenerateTable";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::CalibrationFailed: return "CalibrationFailed";
    case ErrorKind::UnknownStatistic: return "UnknownStatistic";
    case ErrorKind::InvalidScenario: return "InvalidScenario";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace robust_assoc

#endif
