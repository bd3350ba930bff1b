#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qg/graph.hpp"
#include "qg/secular.hpp"

namespace qg {

struct CheckResult {
    std::string name;
    bool passed = false;
    bool skipped = false;     // not applicable to this graph
    double worst = 0.0;       // worst residual observed
    double threshold = 0.0;
    long points = 0;
    std::string note;
};

struct VerifyReport {
    std::string graph_name;
    std::vector<CheckResult> checks;
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed && !c.skipped)
                return false;
        return true;
    }
};

/// Orthogonality of a candidate bond matrix; exposed separately so tests
/// can feed tampered matrices through the same gate the suite uses.
CheckResult check_s_orthogonality(const Eigen::MatrixXd& s, double threshold = 1e-12);

/// The seeded identity suite over one graph: bond-matrix orthogonality,
/// F_R realness, derivative crosschecks, lead-scattering properties,
/// splitting residuals, edge contraction, Hessian block structure, and the
/// inversion / bridge-reflection checks at spectral points.
VerifyReport run_identity_suite(const MetricGraph& g, std::uint64_t seed,
                                int random_points = 1000, int spectral_points = 1000,
                                int reflection_points = 100);

} // namespace qg
