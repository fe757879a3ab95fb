#include "autores/error.hpp"

namespace autores {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DegenerateNearBoundary: return "DegenerateNearBoundary";
        case ErrorKind::OrderUnderflow: return "OrderUnderflow";
        case ErrorKind::ConstantTermPresent: return "ConstantTermPresent";
        case ErrorKind::UnsolvableOrder: return "UnsolvableOrder";
        case ErrorKind::NoRealBranch: return "NoRealBranch";
        case ErrorKind::AmplitudeUnderflow: return "AmplitudeUnderflow";
        case ErrorKind::StepUnderflow: return "StepUnderflow";
        case ErrorKind::OutOfDomain: return "OutOfDomain";
        case ErrorKind::SeparatrixProximity: return "SeparatrixProximity";
        case ErrorKind::InsufficientOscillations: return "InsufficientOscillations";
    }
    return "Unknown";
}

}  // namespace autores
