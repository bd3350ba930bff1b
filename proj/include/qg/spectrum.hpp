#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qg/secular.hpp"

namespace qg {

enum class SpectralClass { Generic, LoopState, ZeroMode, Degenerate, VertexVanishing };

const char* to_string(SpectralClass cls);

/// One spectral datum.  `n` is the 1-based multiplicity-expanded index: a
/// record of multiplicity m advances the index of the next record by m.
struct EigenvalueRecord {
    long n = 0;
    double k = 0.0;
    int multiplicity = 1;
    SpectralClass cls = SpectralClass::Generic;
    TorusPoint x;
    bool flagged = false;
    std::string flag;
};

struct ScanConfig {
    std::optional<long> count;   // stop after the first N eigenvalues...
    std::optional<double> kmax;  // ...or cover (0, kmax]
    int oversample = 8;          // samples per mean eigenvalue spacing pi/L
    /// Guaranteed relative accuracy of located roots.  Bisection in fact
    /// continues until the floating-point bracket collapses, which is what
    /// the multiplicity thresholds at large k require.
    double bisection_rel_tol = 1e-12;
    /// |F_R| depth treated as a root when a dip refines without a sign
    /// change.  The eigenphase crossing audit supersedes dip hunting as the
    /// detector; the threshold remains as the acceptance band for cluster
    /// midpoints whose null space is checked directly.
    double dip_threshold_rel = 1e-6;
    double dedupe_tol = 1e-9;  // merge tolerance in k
    bool parallel = true;      // chunked OpenMP scan; output identical to serial
};

/// Eigenvalues of loop-supported states: k = 2 pi m / l_e over loop edges,
/// sorted, with the loop edge index attached.
std::vector<std::pair<double, int>> loop_lattice(const MetricGraph& g, double kmax);

struct Classification {
    SpectralClass cls = SpectralClass::Generic;
    int multiplicity = 1;
    double smallest_singular = 0.0;
    double min_vertex_value = 0.0;  // normalized by the largest edge amplitude
    bool flagged = false;
    std::string flag;
};

/// Classify a point of the secular manifold: multiplicity from the null
/// space of Id - e^{ix} S, loop states from vanishing loop coordinates,
/// genericity from the vertex values of the canonical eigenfunction.
Classification classify_point(const SecularContext& ctx, const TorusPoint& x, double k);

/// Locate every eigenvalue along the flow phi(k) = k l mod 2pi, index and
/// classify the records.  k = 0 enters as n = 1 with multiplicity 1 iff the
/// graph has no Dirichlet vertex.  Sign-change roots refined by bisection
/// are audited window by window against the exact eigenphase crossing
/// count of e^{ix} S, which is what catches roots clustered inside one
/// scan step; the result is then merged with the analytic loop lattice.
/// Throws ScanError when the located count falls more than 2% short of the
/// Weyl estimate K L / pi.
std::vector<EigenvalueRecord> scan_spectrum(const SecularContext& ctx, const ScanConfig& cfg);

} // namespace qg
