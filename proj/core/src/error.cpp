#include "gsd/error.hpp"

namespace gsd {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Dimension: return "dimension";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::InvalidGraph: return "invalid-graph";
        case ErrorKind::EmptyGraph: return "empty-graph";
        case ErrorKind::DisconnectedGraph: return "disconnected-graph";
        case ErrorKind::MetricNotPsd: return "metric-not-psd";
        case ErrorKind::InfeasibleNoiseGraph: return "infeasible-noise-graph";
        case ErrorKind::NoRegion: return "no-region";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::OptimizerStalled: return "optimizer-stalled";
        case ErrorKind::Usage: return "usage";
    }
    return "unknown";
}

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Usage:
            return 1;
        case ErrorKind::Convergence:
        case ErrorKind::OptimizerStalled:
            return 3;
        default:
            return 2;
    }
}

}  // namespace gsd
