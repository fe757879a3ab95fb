#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace autores {

enum class ErrorKind {
    InvalidArgument,
    DegenerateNearBoundary,
    OrderUnderflow,
    ConstantTermPresent,
    UnsolvableOrder,
    NoRealBranch,
    AmplitudeUnderflow,
    StepUnderflow,
    OutOfDomain,
    SeparatrixProximity,
    InsufficientOscillations,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure surfaced by the library carries one of the kinds above so
// callers (sweeps, the CLI) can record it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace autores
