#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracnls {

enum class ErrorKind {
    InvalidGrid,
    GridMismatch,
    InvalidModel,
    HypothesisViolation,
    TrivialComponent,
    DegenerateCoupling,
    NoConvergence,
    SigmaOutOfRange,
    MissingGroundState,
    DecayCheckFailed,
    EigSolverFailure,
    ConstraintEscape,
    NoSecondSolutionFound,
    SpikeOverflow,
    BallOutsideBox,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorKind kind);

// All library failures surface as this exception; `kind()` lets callers
// (notably the CLI exit-code mapping) branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::HypothesisViolation: return "HypothesisViolation";
    case ErrorKind::TrivialComponent: return "TrivialComponent";
    case ErrorKind::DegenerateCoupling: return "DegenerateCoupling";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SigmaOutOfRange: return "SigmaOutOfRange";
    case ErrorKind::MissingGroundState: return "MissingGroundState";
    case ErrorKind::DecayCheckFailed: return "DecayCheckFailed";
    case ErrorKind::EigSolverFailure: return "EigSolverFailure";
    case ErrorKind::ConstraintEscape: return "ConstraintEscape";
    case ErrorKind::NoSecondSolutionFound: return "NoSecondSolutionFound";
    case ErrorKind::SpikeOverflow: return "SpikeOverflow";
    case ErrorKind::BallOutsideBox: return "BallOutsideBox";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace fracnls
