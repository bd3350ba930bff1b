#pragma once

#include <vector>

#include "qg/secular.hpp"

namespace qg {

/// Bond-amplitude vector of a simple eigenvalue: unit-norm null vector of
/// Id - e^{ix} S with the global phase fixed so the largest-magnitude
/// vertex value is real positive.
struct BondAmplitudes {
    Eigen::VectorXcd a;
};

/// Throws NotSimpleError when the null space dimension differs from 1.
/// After calibration all vertex values and endpoint derivatives are real
/// to 1e-8; a violation signals an assembly bug.
BondAmplitudes amplitudes(const SecularContext& ctx, const TorusPoint& x);

/// Vertex value magnitudes of the canonical eigenfunction, computed from
/// an uncalibrated null vector (phase invariant), normalized by the
/// largest edge amplitude.  Used by the genericity classifier.
std::vector<double> vertex_value_magnitudes(const SecularContext& ctx, const TorusPoint& x,
                                            const Eigen::VectorXcd& null_vector);

/// Real vertex values via any incident bond; cross-bond consistency is
/// checked to 1e-8 (continuity at the vertex).
std::vector<double> vertex_values(const SecularContext& ctx, const TorusPoint& x,
                                  const BondAmplitudes& amp);

/// Amplitude-phase form of the eigenfunction on one edge:
/// f_e(t) = amplitude * cos(k t - phase), phase in [0, 2pi).
struct EdgeWave {
    double amplitude = 0.0;
    double phase = 0.0;
};

std::vector<EdgeWave> edge_waves(const SecularContext& ctx, const TorusPoint& x, double k,
                                 const BondAmplitudes& amp);

struct NodalData {
    std::vector<int> per_edge;
    long total = 0;    // zero count phi
    long surplus = 0;  // phi - (n - 1)
};

/// Count interior zeros of every edge wave in closed form.  Zeros within
/// 1e-8 of an edge endpoint abort with AmbiguousZeroError: the record must
/// be excluded rather than miscounted by one.
NodalData nodal_count(const MetricGraph& g, double k, long n, const std::vector<EdgeWave>& waves);

/// Largest Neumann-vertex violation of sum of outgoing derivatives,
/// normalized by k * max amplitude.
double current_conservation_residual(const MetricGraph& g, double k,
                                     const std::vector<EdgeWave>& waves);

} // namespace qg
