#include "epicast/error.hpp"

namespace epicast {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::EmptyAfterTruncation: return "EmptyAfterTruncation";
        case ErrorKind::SeriesTooShort: return "SeriesTooShort";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::ZeroActual: return "ZeroActual";
        case ErrorKind::NonPositiveValue: return "NonPositiveValue";
        case ErrorKind::InsufficientTail: return "InsufficientTail";
        case ErrorKind::NoViableOrders: return "NoViableOrders";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::KernelTooWide: return "KernelTooWide";
        case ErrorKind::WindowLengthMismatch: return "WindowLengthMismatch";
        case ErrorKind::NumericalDivergence: return "NumericalDivergence";
        case ErrorKind::AllInitsDiverged: return "AllInitsDiverged";
        case ErrorKind::CountryNotFound: return "CountryNotFound";
        case ErrorKind::MalformedHeader: return "MalformedHeader";
        case ErrorKind::NonNumericCell: return "NonNumericCell";
        case ErrorKind::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace epicast
