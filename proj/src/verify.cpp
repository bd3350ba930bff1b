#include "qg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qg/nodal.hpp"
#include "qg/rng.hpp"
#include "qg/scattering.hpp"
#include "qg/spectrum.hpp"

namespace qg {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

TorusPoint random_point(int dim, Rng& rng) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i)
        x[i] = rng.uniform(0.0, two_pi);
    return TorusPoint(std::move(x));
}

FluxVector random_flux(int dim, Rng& rng) {
    Eigen::VectorXd a(dim);
    for (int i = 0; i < dim; ++i)
        a[i] = rng.uniform(0.0, two_pi);
    return FluxVector(std::move(a));
}

CheckResult skipped(const std::string& name, const std::string& why) {
    CheckResult c;
    c.name = name;
    c.skipped = true;
    c.passed = true;
    c.note = why;
    return c;
}

CheckResult realness_check(const SecularContext& ctx, Rng& rng, int points) {
    CheckResult c{"secular realness", false, false, 0.0, 1e-8, points, ""};
    for (int i = 0; i < points; ++i) {
        const double r = ctx.realness_residual(random_point(ctx.graph().edge_count(), rng),
                                               random_flux(ctx.beta(), rng));
        c.worst = std::max(c.worst, r);
    }
    c.passed = c.worst < c.threshold;
    return c;
}

CheckResult derivative_check(const SecularContext& ctx, Rng& rng, int points) {
    CheckResult c{"derivatives vs finite differences", false, false, 0.0, 1e-6, points, ""};
    for (int i = 0; i < points; ++i) {
        const FdReport r = ctx.fd_crosscheck(random_point(ctx.graph().edge_count(), rng));
        c.worst = std::max({c.worst, r.grad_residual, r.hess_residual});
    }
    c.passed = c.worst < c.threshold;
    return c;
}

CheckResult extended_structure_check(const MetricGraph& g) {
    CheckResult c{"lead-extended matrix structure", false, false, 0.0, 1e-12, 1, ""};
    std::vector<int> leads{0};
    if (g.vertex_count() > 1)
        leads.push_back(1);
    ScatteringConfig cfg(g, leads);
    const Eigen::MatrixXd& s = cfg.extended_matrix();
    const int n = static_cast<int>(s.rows());
    c.worst = (s * s.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    c.worst = std::max(c.worst, (cfg.r() - cfg.r().transpose()).cwiseAbs().maxCoeff());
    // t' = (J t)^T with J the direction-reversal permutation on graph bonds
    Eigen::MatrixXd jt = cfg.t();
    for (int e = 0; e < g.edge_count(); ++e)
        jt.row(2 * e).swap(jt.row(2 * e + 1));
    c.worst = std::max(c.worst, (cfg.t_prime() - jt.transpose()).cwiseAbs().maxCoeff());
    c.passed = c.worst < c.threshold;
    return c;
}

CheckResult z_properties_check(const MetricGraph& g, Rng& rng, int points) {
    CheckResult c{"lead scattering unitarity and symmetries", false, false, 0.0, 1e-10, points, ""};
    std::vector<int> leads{0};
    if (g.vertex_count() > 1)
        leads.push_back(1);
    ScatteringConfig cfg(g, leads);
    const int beta = cfg.cut().size();
    const int m = cfg.leads();
    long used = 0;
    for (int i = 0; i < points; ++i) {
        TorusPoint x = random_point(g.edge_count(), rng);
        FluxVector a = random_flux(beta, rng);
        try {
            const Eigen::MatrixXcd z = cfg.Z(x, a);
            const Eigen::MatrixXcd z_conj = cfg.Z(x.inverted(), a.negated());
            const Eigen::MatrixXcd z_rev = cfg.Z(x, a.negated());
            c.worst = std::max(c.worst, (z * z.adjoint() - Eigen::MatrixXcd::Identity(m, m))
                                            .cwiseAbs()
                                            .maxCoeff());
            c.worst = std::max(c.worst, (z_conj - z.conjugate()).cwiseAbs().maxCoeff());
            c.worst = std::max(c.worst, (z_rev - z.transpose()).cwiseAbs().maxCoeff());
            ++used;
        } catch (const InWSetError&) {
            // measure-zero set; skip the point
        }
    }
    c.points = used;
    c.passed = c.worst < c.threshold && used > points / 2;
    return c;
}

CheckResult splitting_check(const std::string& name, const SecularContext& ctx,
                            const Splitting& split, Rng& rng, int points) {
    CheckResult c{name, false, false, 0.0, 1e-9, points, ""};
    long used = 0;
    for (int i = 0; i < points; ++i) {
        TorusPoint x = random_point(ctx.graph().edge_count(), rng);
        FluxVector a = random_flux(ctx.beta(), rng);
        try {
            const SplittingFactors f = splitting_factorization(ctx, split, x, a);
            c.worst = std::max(c.worst, f.residual / std::max(1.0, std::abs(f.F)));
            ++used;
        } catch (const InWSetError&) {
        }
    }
    c.points = used;
    c.passed = c.worst < c.threshold && used > points / 2;
    return c;
}

CheckResult contraction_check(const MetricGraph& g) {
    CheckResult c{"edge contraction identity", false, false, 0.0, 1e-9, 0, ""};
    bool any = false;
    for (int e = 0; e < g.edge_count(); ++e) {
        if (g.is_loop(e))
            continue;
        if (g.condition(g.edge(e).u) != VertexCondition::Neumann ||
            g.condition(g.edge(e).v) != VertexCondition::Neumann)
            continue;
        any = true;
        contract_edge(g, e);  // throws when the identity fails at any probe
        c.points += 100;
    }
    if (!any)
        return skipped(c.name, "no contractible edge");
    c.passed = true;
    return c;
}

CheckResult hessian_block_check(const SecularContext& ctx, const BlockDecomposition& dec,
                                Rng& rng, int points) {
    CheckResult c{"Hessian off-block entries", false, false, 0.0, 1e-8, points, ""};
    if (dec.blocks.size() < 2)
        return skipped(c.name, "fewer than two cycle blocks");
    for (int i = 0; i < points; ++i) {
        const Eigen::MatrixXd h = ctx.hessian_alpha(random_point(ctx.graph().edge_count(), rng));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
        const double norm = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
        for (int p = 0; p < h.rows(); ++p)
            for (int q = 0; q < h.cols(); ++q)
                if (dec.flux_block[p] != dec.flux_block[q])
                    c.worst = std::max(c.worst, std::abs(h(p, q)) / norm);
    }
    c.passed = c.worst < c.threshold;
    return c;
}

} // namespace

CheckResult check_s_orthogonality(const Eigen::MatrixXd& s, double threshold) {
    CheckResult c{"bond matrix orthogonality", false, false, 0.0, threshold, 1, ""};
    const int n = static_cast<int>(s.rows());
    c.worst = (s * s.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    c.passed = c.worst < threshold;
    return c;
}

VerifyReport run_identity_suite(const MetricGraph& g, std::uint64_t seed, int random_points,
                                int spectral_points, int reflection_points) {
    VerifyReport report;
    Rng rng(seed);
    SecularContext ctx(g);
    const auto dec = block_decomposition(g);

    report.checks.push_back(check_s_orthogonality(ctx.bond_matrix()));
    report.checks.push_back(realness_check(ctx, rng, random_points));
    report.checks.push_back(derivative_check(ctx, rng, random_points));
    report.checks.push_back(extended_structure_check(g));
    report.checks.push_back(z_properties_check(g, rng, random_points));

    if (!dec.bridge_edges.empty()) {
        report.checks.push_back(splitting_check(
            "splitting at a bridge", ctx, split_at_bridge(g, dec.bridge_edges.front()), rng,
            random_points));
    } else {
        report.checks.push_back(skipped("splitting at a bridge", "no bridge"));
    }
    {
        int cut_vertex = -1;
        for (int v = 0; v < g.vertex_count() && cut_vertex < 0; ++v) {
            try {
                split_at_cut_vertex(g, v);
                cut_vertex = v;
            } catch (const GraphError&) {
            }
        }
        if (cut_vertex >= 0)
            report.checks.push_back(splitting_check("splitting at a cut vertex", ctx,
                                                    split_at_cut_vertex(g, cut_vertex), rng,
                                                    random_points));
        else
            report.checks.push_back(skipped("splitting at a cut vertex", "no cut vertex"));
    }

    report.checks.push_back(contraction_check(g));
    report.checks.push_back(hessian_block_check(ctx, dec, rng, random_points));

    // spectral-point checks: inversion symmetry and the bridge reflection
    {
        CheckResult inv{"inversion symmetry at spectral points", false, false, 0.0, 0.0, 0, ""};
        CheckResult refl{"bridge reflection at spectral points", false, false, 0.0, 0.0, 0, ""};
        const auto t = topology_summary(g);
        const long need = static_cast<long>(std::ceil(spectral_points / t.generic_fraction)) + 64;
        ScanConfig cfg;
        cfg.count = need;
        const auto records = scan_spectrum(ctx, cfg);

        long inv_pass = 0;
        for (const auto& rec : records) {
            if (rec.cls != SpectralClass::Generic || rec.flagged)
                continue;
            if (inv.points >= spectral_points)
                break;
            try {
                const bool ok = inversion_check(ctx, rec.x).passed();
                inv.points += 1;
                inv_pass += ok;
            } catch (const DegenerateHessianError&) {
                // excluded sample: the surplus is undecidable here
            }
        }
        inv.passed = inv.points > spectral_points / 2 && inv_pass == inv.points;
        inv.worst = static_cast<double>(inv.points - inv_pass);
        report.checks.push_back(inv);

        if (dec.kind == SeparationKind::EdgeSeparation && dec.blocks.size() >= 2 &&
            dec.blocks[1].attach_bridge >= 0) {
            const Splitting split = split_at_bridge(g, dec.blocks[1].attach_bridge);
            long refl_pass = 0;
            for (const auto& rec : records) {
                if (rec.cls != SpectralClass::Generic || rec.flagged)
                    continue;
                if (refl.points >= reflection_points)
                    break;
                try {
                    const bool ok = bridge_reflection_check(ctx, dec, split, rec.x).passed();
                    refl.points += 1;
                    refl_pass += ok;
                } catch (const DegenerateHessianError&) {
                }
            }
            refl.passed = refl.points > reflection_points / 2 && refl_pass == refl.points;
            refl.worst = static_cast<double>(refl.points - refl_pass);
            report.checks.push_back(refl);
        } else {
            report.checks.push_back(skipped(refl.name, "no edge separation"));
        }
    }
    return report;
}

} // namespace qg
