#include "qg/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qg/eigenfunction.hpp"

namespace qg {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr int kChunkIntervals = 4096;

double torus_distance_to_zero(double x) {
    return std::min(x, two_pi - x);
}

/// Bisect a sign change of F_R along the flow down to bracket collapse.
/// Returns the endpoint with the smaller |F_R|.
double bisect_root(const SecularContext& ctx, const Eigen::VectorXd& lengths, double lo,
                   double hi, double flo) {
    double fhi = ctx.FR0(TorusPoint::flow(lengths, hi));
    for (int iter = 0; iter < 128; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        const double fmid = ctx.FR0(TorusPoint::flow(lengths, mid));
        if (fmid == 0.0)
            return mid;
        if ((fmid > 0) == (flo > 0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
    }
    return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

/// Eigenphases of e^{ix(k)} S, sorted ascending in (-pi, pi].
std::vector<double> eigenphases(const SecularContext& ctx, const Eigen::VectorXd& lengths,
                                double k) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(
        ctx.flow_unitary(TorusPoint::flow(lengths, k)), false);
    if (es.info() != Eigen::Success)
        throw ScanError("eigenphase computation failed at k = " + std::to_string(k));
    std::vector<double> phases(es.eigenvalues().size());
    for (long i = 0; i < es.eigenvalues().size(); ++i)
        phases[i] = std::arg(es.eigenvalues()[i]);
    std::sort(phases.begin(), phases.end());
    return phases;
}

/// Exact number of eigenvalues in (a, b]: eigenphases advance forward by at
/// most `advance` < pi/2 over the window and enter the band (0, w] only by
/// crossing zero, so the band population grows by exactly one per crossing
/// once its upper edge w sits in a phase-free slot of the starting
/// configuration.  Returns -1 when no slot exists (the window must then be
/// split, which shrinks the advance).
long phase_crossings(const std::vector<double>& at_a, const std::vector<double>& at_b,
                     double advance) {
    const double margin = 1.05 * advance + 1e-14;
    // largest gap between consecutive starting phases inside (0, pi)
    double w = -1.0, best_gap = 0.0;
    double prev = 0.0;
    auto consider = [&](double next) {
        const double gap = next - prev;
        if (gap > best_gap && gap > margin) {
            best_gap = gap;
            w = prev + margin + 0.5 * (gap - margin);
        }
        prev = next;
    };
    for (double t : at_a)
        if (t > 0.0 && t < std::numbers::pi)
            consider(t);
    consider(std::numbers::pi);
    if (w < 0.0)
        return -1;
    auto count_band = [&](const std::vector<double>& phases) {
        long c = 0;
        for (double t : phases)
            if (t > 0.0 && t <= w)
                ++c;
        return c;
    };
    return count_band(at_b) - count_band(at_a);
}

/// Resolve the window (a, b] into roots.  The exact crossing count either
/// confirms the sign-change candidates wholesale (the common case) or
/// drives a recursive split; clusters tighter than half the dedupe scale
/// come out as one point whose multiplicity the null space supplies.
void resolve_window(const SecularContext& ctx, const Eigen::VectorXd& lengths, double a,
                    double b, const std::vector<double>& phases_a,
                    const std::vector<double>& phases_b,
                    const std::vector<double>& candidates, double l_max,
                    std::vector<double>& out) {
    const long count = phase_crossings(phases_a, phases_b, (b - a) * l_max);
    if (count == 0)
        return;
    if (count == static_cast<long>(candidates.size())) {
        out.insert(out.end(), candidates.begin(), candidates.end());
        return;
    }
    if (count == 1) {
        const double fa = ctx.FR0(TorusPoint::flow(lengths, a));
        const double fb = ctx.FR0(TorusPoint::flow(lengths, b));
        if ((fa > 0) != (fb > 0)) {
            out.push_back(bisect_root(ctx, lengths, a, b, fa));
        } else if (std::min(std::abs(fa), std::abs(fb)) < 1e-6) {
            out.push_back(std::abs(fa) <= std::abs(fb) ? a : b);  // root on a sample
        } else {
            throw ScanError("odd crossing window without a sign change near k = " +
                            std::to_string(a));
        }
        return;
    }
    if (b - a < std::max(5e-10, 1e-13 * a)) {
        out.push_back(0.5 * (a + b));  // unresolvable cluster, one record
        return;
    }
    const double mid = 0.5 * (a + b);
    const auto phases_mid = eigenphases(ctx, lengths, mid);
    std::vector<double> left_cand, right_cand;
    for (double r : candidates)
        (r <= mid ? left_cand : right_cand).push_back(r);
    resolve_window(ctx, lengths, a, mid, phases_a, phases_mid, left_cand, l_max, out);
    resolve_window(ctx, lengths, mid, b, phases_mid, phases_b, right_cand, l_max, out);
}

struct ChunkResult {
    std::vector<double> roots;
    std::string error;
};

/// Scan the intervals [t_j, t_{j+1}], j in [lo_interval, hi_interval).
/// Samples are t_j = j*step except t_0 which sits just above zero to avoid
/// the root of F at the torus origin.  Sign changes of F_R give the
/// candidate roots; every window of `window_stride` intervals is audited
/// against the exact eigenphase crossing count.
ChunkResult scan_chunk(const SecularContext& ctx, const Eigen::VectorXd& lengths, double step,
                       long total_intervals, long lo_interval, long hi_interval,
                       long window_stride, double l_max) {
    ChunkResult result;
    auto sample_at = [&](long j) { return j == 0 ? 1e-3 * step : j * step; };

    const long jlo = lo_interval;
    const long jhi = std::min<long>(total_intervals, hi_interval);
    std::vector<double> value(jhi - jlo + 1);
    for (long j = jlo; j <= jhi; ++j)
        value[j - jlo] = ctx.FR0(TorusPoint::flow(lengths, sample_at(j)));
    auto val = [&](long j) { return value[j - jlo]; };

    std::vector<double> phases_lo = eigenphases(ctx, lengths, sample_at(jlo));
    for (long w0 = jlo; w0 < jhi; w0 += window_stride) {
        const long w1 = std::min(jhi, w0 + window_stride);
        std::vector<double> candidates;
        for (long j = w0; j < w1; ++j) {
            const double fa = val(j), fb = val(j + 1);
            if ((fa > 0) != (fb > 0))
                candidates.push_back(bisect_root(ctx, lengths, sample_at(j), sample_at(j + 1), fa));
        }
        std::vector<double> phases_hi = eigenphases(ctx, lengths, sample_at(w1));
        resolve_window(ctx, lengths, sample_at(w0), sample_at(w1), phases_lo, phases_hi,
                       candidates, l_max, result.roots);
        phases_lo = std::move(phases_hi);
    }
    return result;
}

/// F_R flips sign across every odd-multiplicity root, so the signs at gap
/// midpoints between consecutive roots must alternate.  A violation means
/// roots are missing in one of the two adjacent gaps (tight clusters inside
/// a single scan step): rescan those gaps at a finer resolution.  Residual
/// violations are legitimate only at even-multiplicity roots.
void audit_sign_parity(const SecularContext& ctx, const Eigen::VectorXd& lengths,
                       std::vector<double>& roots, double k_start, double k_end,
                       double dedupe_tol) {
    if (roots.empty())
        return;
    auto value_at = [&](double k) { return ctx.FR0(TorusPoint::flow(lengths, k)); };
    for (int round = 0; round < 8; ++round) {
        std::vector<char> mid(roots.size() + 1);
        for (size_t i = 0; i <= roots.size(); ++i) {
            const double lo = (i == 0) ? k_start : roots[i - 1];
            const double hi = (i == roots.size()) ? std::max(k_end, roots.back() + 1e-6)
                                                  : roots[i];
            mid[i] = value_at(0.5 * (lo + hi)) > 0;
        }
        std::vector<double> found;
        for (size_t i = 0; i + 1 <= roots.size(); ++i) {
            if (mid[i] != mid[i + 1])
                continue;
            // a cluster hides next to root i: compare the sign just beside
            // the root with the gap midpoints and bisect the disagreeing side
            const double r = roots[i];
            const double h = std::max(1e4 * std::numeric_limits<double>::epsilon() * r, 1e-13);
            const double left_mid = 0.5 * (((i == 0) ? k_start : roots[i - 1]) + r);
            const double right_mid =
                0.5 * (r + ((i + 1 < roots.size()) ? roots[i + 1]
                                                   : std::max(k_end, roots.back() + 1e-6)));
            const double f_right = value_at(r + h);
            const double f_left = value_at(r - h);
            if ((f_right > 0) != mid[i + 1]) {
                found.push_back(bisect_root(ctx, lengths, r + h, right_mid, f_right));
            } else if ((f_left > 0) != mid[i]) {
                found.push_back(bisect_root(ctx, lengths, left_mid, r - h,
                                            value_at(left_mid)));
            } else if ((f_left > 0) == (f_right > 0)) {
                // no flip across the root: even multiplicity, or a pair
                // closer than the resolvable scale
                NullSpaceInfo ns = ctx.null_space(TorusPoint::flow(lengths, r));
                if (ns.multiplicity < 2)
                    throw ScanError("sign parity unresolved near k = " + std::to_string(r) +
                                    "; re-run with a larger oversample");
            }
        }
        if (found.empty())
            return;
        roots.insert(roots.end(), found.begin(), found.end());
        std::sort(roots.begin(), roots.end());
        std::vector<double> unique;
        for (double r : roots)
            if (unique.empty() || r - unique.back() > dedupe_tol)
                unique.push_back(r);
        roots.swap(unique);
    }
    throw ScanError("sign parity audit did not converge; re-run with a larger oversample");
}

Classification classify_or_flag(const SecularContext& ctx, const TorusPoint& x, double k) {
    try {
        return classify_point(ctx, x, k);
    } catch (const Error& err) {
        Classification c;
        c.cls = SpectralClass::Degenerate;
        c.flagged = true;
        c.flag = err.what();
        return c;
    }
}

} // namespace

const char* to_string(SpectralClass cls) {
    switch (cls) {
        case SpectralClass::Generic: return "generic";
        case SpectralClass::LoopState: return "loop_state";
        case SpectralClass::ZeroMode: return "zero_mode";
        case SpectralClass::Degenerate: return "degenerate";
        case SpectralClass::VertexVanishing: return "vertex_vanishing";
    }
    return "?";
}

std::vector<std::pair<double, int>> loop_lattice(const MetricGraph& g, double kmax) {
    std::vector<std::pair<double, int>> out;
    for (int e = 0; e < g.edge_count(); ++e) {
        if (!g.is_loop(e))
            continue;
        const double l = g.edge(e).length;
        for (long m = 1; m * two_pi / l <= kmax; ++m)
            out.push_back({m * two_pi / l, e});
    }
    std::sort(out.begin(), out.end());
    return out;
}

Classification classify_point(const SecularContext& ctx, const TorusPoint& x, double /*k*/) {
    Classification c;
    NullSpaceInfo ns = ctx.null_space(x);
    c.multiplicity = std::max(1, ns.multiplicity);
    c.smallest_singular = ns.singular_values[ns.singular_values.size() - 1];

    if (ns.multiplicity > 1) {
        c.cls = SpectralClass::Degenerate;
        return c;
    }

    const MetricGraph& g = ctx.graph();
    for (int e = 0; e < g.edge_count(); ++e) {
        if (g.is_loop(e) && torus_distance_to_zero(x[e]) < 1e-9) {
            c.cls = SpectralClass::LoopState;
            return c;
        }
    }

    auto values = vertex_value_magnitudes(ctx, x, ns.vector);
    c.min_vertex_value = *std::min_element(values.begin(), values.end());
    if (c.min_vertex_value > 1e-8) {
        c.cls = SpectralClass::Generic;
    } else if (c.min_vertex_value < 1e-10) {
        c.cls = SpectralClass::VertexVanishing;
    } else {
        c.cls = SpectralClass::VertexVanishing;
        c.flagged = true;
        c.flag = "ambiguous vertex value " + std::to_string(c.min_vertex_value);
    }
    return c;
}

std::vector<EigenvalueRecord> scan_spectrum(const SecularContext& ctx, const ScanConfig& cfg) {
    if (!cfg.count && !cfg.kmax)
        throw ScanError("scan needs a target: eigenvalue count or kmax");
    if (cfg.count && cfg.kmax)
        throw ScanError("give either a count or kmax, not both");
    if (cfg.oversample < 4)
        throw ScanError("oversample must be at least 4");
    if (cfg.count && *cfg.count < 1)
        throw ScanError("count must be positive");

    const MetricGraph& g = ctx.graph();
    const Eigen::VectorXd lengths = ctx.lengths();
    const double L = lengths.sum();
    const bool has_zero_mode = g.all_neumann();

    double K;
    if (cfg.kmax) {
        K = *cfg.kmax;
        if (!(K > 0))
            throw ScanError("kmax must be positive");
    } else {
        const double n_target = static_cast<double>(*cfg.count);
        K = (n_target + std::max(16.0, 0.03 * n_target)) * std::numbers::pi / L;
    }

    const double l_max = lengths.maxCoeff();
    for (int attempt = 0;; ++attempt) {
        const double step = std::numbers::pi / (L * cfg.oversample);
        const long total_intervals = static_cast<long>(std::ceil(K / step));
        const long chunks = (total_intervals + kChunkIntervals - 1) / kChunkIntervals;
        // phase-count window: a power of two of scan steps, short enough
        // that eigenphases advance well below pi/2 across it
        long window_stride = 1;
        while (2 * window_stride <= kChunkIntervals &&
               2 * window_stride * step * l_max <= std::numbers::pi / 4)
            window_stride *= 2;

        std::vector<ChunkResult> results(chunks);
        auto run_chunk = [&](long c) {
            const long lo = c * kChunkIntervals;
            const long hi = std::min<long>(total_intervals, lo + kChunkIntervals);
            try {
                results[c] = scan_chunk(ctx, lengths, step, total_intervals, lo, hi,
                                        window_stride, l_max);
            } catch (const std::exception& ex) {
                results[c].error = ex.what();
            }
        };
        if (cfg.parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
            for (long c = 0; c < chunks; ++c)
                run_chunk(c);
        } else {
            for (long c = 0; c < chunks; ++c)
                run_chunk(c);
        }
        std::vector<double> roots;
        for (const auto& r : results) {
            if (!r.error.empty())
                throw ScanError("scan chunk failed: " + r.error);
            roots.insert(roots.end(), r.roots.begin(), r.roots.end());
        }

        // merge the analytic loop lattice: replace matched roots by the
        // lattice values, insert any the scan missed
        std::sort(roots.begin(), roots.end());
        for (auto [klat, edge] : loop_lattice(g, K)) {
            (void)edge;
            auto it = std::lower_bound(roots.begin(), roots.end(), klat - cfg.dedupe_tol);
            if (it != roots.end() && std::abs(*it - klat) <= cfg.dedupe_tol)
                *it = klat;
            else
                roots.insert(std::upper_bound(roots.begin(), roots.end(), klat), klat);
        }
        std::sort(roots.begin(), roots.end());
        std::vector<double> unique_roots;
        for (double r : roots) {
            if (r > K)
                break;
            if (unique_roots.empty() || r - unique_roots.back() > cfg.dedupe_tol)
                unique_roots.push_back(r);
        }

        audit_sign_parity(ctx, lengths, unique_roots, 1e-3 * step, K, cfg.dedupe_tol);
        while (!unique_roots.empty() && unique_roots.back() > K)
            unique_roots.pop_back();

        // classify in parallel; record slots keep the deterministic order
        std::vector<Classification> cls(unique_roots.size());
        auto classify_at = [&](size_t i) {
            cls[i] = classify_or_flag(ctx, TorusPoint::flow(lengths, unique_roots[i]),
                                      unique_roots[i]);
        };
        if (cfg.parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64)
#endif
            for (long i = 0; i < static_cast<long>(unique_roots.size()); ++i)
                classify_at(i);
        } else {
            for (size_t i = 0; i < unique_roots.size(); ++i)
                classify_at(i);
        }

        std::vector<EigenvalueRecord> records;
        records.reserve(unique_roots.size() + 1);
        long n = 1;
        if (has_zero_mode) {
            EigenvalueRecord zero;
            zero.n = n;
            zero.k = 0.0;
            zero.multiplicity = 1;
            zero.cls = SpectralClass::ZeroMode;
            zero.x = TorusPoint(Eigen::VectorXd::Zero(g.edge_count()));
            records.push_back(std::move(zero));
            n += 1;
        }
        for (size_t i = 0; i < unique_roots.size(); ++i) {
            EigenvalueRecord rec;
            rec.n = n;
            rec.k = unique_roots[i];
            rec.multiplicity = cls[i].multiplicity;
            rec.cls = cls[i].cls;
            rec.x = TorusPoint::flow(lengths, unique_roots[i]);
            rec.flagged = cls[i].flagged;
            rec.flag = cls[i].flag;
            n += rec.multiplicity;
            records.push_back(std::move(rec));
        }
        const long found = n - 1;

        // Weyl-count guard: K L / pi eigenvalues expected up to K
        const double expected = K * L / std::numbers::pi;
        if (expected >= 200.0 && static_cast<double>(found) < 0.98 * expected)
            throw ScanError("located " + std::to_string(found) + " eigenvalues where about " +
                            std::to_string(static_cast<long>(expected)) +
                            " were expected; re-run with a larger oversample");

        if (!cfg.count)
            return records;
        if (found >= *cfg.count) {
            std::vector<EigenvalueRecord> trimmed;
            for (auto& rec : records) {
                if (rec.n > *cfg.count)
                    break;
                trimmed.push_back(std::move(rec));
            }
            return trimmed;
        }
        if (attempt >= 8)
            throw ScanError("could not accumulate the requested eigenvalue count");
        K *= 1.15;
    }
}

} // namespace qg
