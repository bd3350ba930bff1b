#pragma once

#include <stdexcept>
#include <string>

namespace qg {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid graph description or parameter.
struct GraphError : Error {
    using Error::Error;
};

/// File / stream problem.
struct IoError : Error {
    using Error::Error;
};

/// Requested a simple null space but the point carries multiplicity != 1.
struct NotSimpleError : Error {
    using Error::Error;
};

/// A zero of an eigenfunction grazes an edge endpoint; the record cannot
/// be counted reliably and must be excluded instead of guessed.
struct AmbiguousZeroError : Error {
    using Error::Error;
};

/// A Hessian eigenvalue sits inside the zero band; the Morse index is
/// not decidable at this point.
struct DegenerateHessianError : Error {
    using Error::Error;
};

/// The gradient projected on the length vector vanished where it must not;
/// indicates the point was misclassified as generic.
struct ZeroGradientError : Error {
    using Error::Error;
};

/// The interior matrix Id - e^{ix+ia} S~ is singular: an eigenfunction
/// vanishes at every lead attachment vertex.
struct InWSetError : Error {
    using Error::Error;
};

/// Contraction of a loop edge is undefined (the secular function becomes
/// identically zero).
struct LoopContractionError : Error {
    using Error::Error;
};

/// The scan grid was too coarse or another spectral-scan invariant failed.
struct ScanError : Error {
    using Error::Error;
};

/// The rescaled secular function failed its realness bound; an assembly bug.
struct RealnessError : Error {
    using Error::Error;
};

} // namespace qg
