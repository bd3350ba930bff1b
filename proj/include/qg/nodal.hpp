#pragma once

#include <map>
#include <string>
#include <vector>

#include "qg/scattering.hpp"
#include "qg/spectrum.hpp"

namespace qg {

/// Number of eigenvalues below -tol with tol = max(rel_tol * spectral
/// norm, abs_tol).  Eigenvalues inside the dead band [-tol, tol] raise
/// DegenerateHessianError instead of being counted either way.
///
/// The flux Hessian comes from exact trigonometric interpolation, so its
/// entries are accurate to a few ulps of the sampled secular values
/// (about 1e-13 here); the default band sits two to three orders above
/// that floor.  Records near the degenerate strata land inside it at a
/// rate of a few per million and are excluded, never guessed.
int morse_index(const Eigen::MatrixXd& m, double rel_tol = 1e-11, double abs_tol = 1e-12);

/// sigma(x) = Morse index of -H_alpha(F_R)(x; 0) / (grad_x F_R . l).
/// Requires a generic point; throws ZeroGradientError when the gradient
/// projection vanishes (misclassification signal).
int surplus_morse(const SecularContext& ctx, const TorusPoint& x);

/// Same index computed through the complex function F; the two routes must
/// agree exactly on generic points.
int surplus_morse_complex(const SecularContext& ctx, const TorusPoint& x);

/// Per-block Morse indices of the diagonal Hessian sub-blocks.  Off-block
/// entries are asserted below 1e-8 * |H|; a violation indicates a broken
/// flux partition.
std::vector<int> local_surplus(const SecularContext& ctx, const TorusPoint& x,
                               const BlockDecomposition& dec);

struct SurplusSample {
    long n = 0;
    double k = 0.0;
    int sigma_direct = -1;
    int sigma_morse = -1;
    std::vector<int> local;
    bool ok = false;
    std::string flag;  // exclusion reason when !ok
};

/// Run one generic record through both surplus routes and the per-block
/// decomposition.  Exclusions (grazing zeros, degenerate Hessians) are
/// reported through `flag`, never imputed.
SurplusSample surplus_sample(const SecularContext& ctx, const BlockDecomposition& dec,
                             const EigenvalueRecord& record, bool with_direct = true);

struct SurplusDistribution {
    int beta = 0;
    std::vector<int> block_beta;
    std::vector<long> counts;  // sigma histogram over clean generic samples
    long samples = 0;          // clean generic samples accumulated
    long scanned = 0;          // records inspected
    long generic = 0;          // generic records among them
    long excluded = 0;         // generic records dropped with a flag
    long mismatches = 0;       // sigma_direct != sigma_morse (expect zero)
    std::map<std::vector<int>, long> joint;  // per-block surplus tuple -> count
};

/// Accumulate the surplus distribution over already-scanned records.
SurplusDistribution accumulate_distribution(const SecularContext& ctx,
                                            const BlockDecomposition& dec,
                                            const std::vector<EigenvalueRecord>& records,
                                            bool parallel = true);

/// Scan the first N eigenvalues and accumulate.  Refuses to report on
/// fewer than 100 generic samples.
SurplusDistribution estimate_distribution(const SecularContext& ctx, ScanConfig scan, long N);

struct DistributionDiagnostics {
    std::vector<double> P;            // normalized over clean samples
    double mean = 0.0;
    double beta_recovered = 0.0;      // 2 * mean
    double symmetry_residual = 0.0;   // max_s |P(s) - P(beta - s)|
    double tv_binomial = 0.0;         // total variation to Bin(beta, 1/2)
};

DistributionDiagnostics distribution_diagnostics(const SurplusDistribution& d);

std::vector<double> binomial_half(int beta);

/// Conditional law of one block's surplus given the surpluses of all other
/// blocks: one row per observed complement tuple.
struct ConditionalTable {
    int block = 0;
    struct Row {
        std::vector<int> given;  // complement tuple, block order with `block` removed
        long samples = 0;
        std::vector<double> P;   // over s = 0..block_beta
    };
    std::vector<Row> rows;
};

std::vector<ConditionalTable> conditional_tables(const SurplusDistribution& d);

struct InversionReport {
    bool on_manifold = false;
    bool image_generic = false;
    bool symmetric = false;
    int sigma = -1;
    int sigma_image = -1;
    bool passed() const { return on_manifold && image_generic && symmetric; }
};

/// Check sigma(-x) = beta - sigma(x) at a generic point.
InversionReport inversion_check(const SecularContext& ctx, const TorusPoint& x);

struct BridgeReflectionReport {
    bool on_manifold = false;
    bool image_generic = false;
    bool part1_fixed = false;    // sigma^(1) unchanged
    bool part2_flipped = false;  // sigma^(2) -> beta^(2) - sigma^(2)
    TorusPoint image;
    bool passed() const { return on_manifold && image_generic && part1_fixed && part2_flipped; }
};

/// Apply the bridge reflection R and verify its three post-conditions.
/// `block1` / `block2` name the decomposition blocks lying in part 1 and
/// part 2 of the splitting.
BridgeReflectionReport bridge_reflection_check(const SecularContext& ctx,
                                               const BlockDecomposition& dec,
                                               const Splitting& split, const TorusPoint& x);

} // namespace qg
