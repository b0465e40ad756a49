#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epicast {

/// Failure categories raised across the toolkit.
enum class ErrorKind {
    InvalidArgument,
    EmptyAfterTruncation,
    SeriesTooShort,
    TooFewSamples,
    LengthMismatch,
    ZeroActual,
    NonPositiveValue,
    InsufficientTail,
    NoViableOrders,
    ShapeMismatch,
    KernelTooWide,
    WindowLengthMismatch,
    NumericalDivergence,
    AllInitsDiverged,
    CountryNotFound,
    MalformedHeader,
    NonNumericCell,
    IoFailure,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying an ErrorKind so callers can branch on the category.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace epicast
