#include "qg/nodal.hpp"

#include <algorithm>
#include <cmath>

#include "qg/eigenfunction.hpp"

namespace qg {

namespace {

/// Gradient projection grad F_R . l; throws when it vanishes.
double gradient_projection(const SecularContext& ctx, const TorusPoint& x) {
    const Eigen::VectorXd grad = ctx.gradient_x(x);
    const Eigen::VectorXd l = ctx.lengths();
    const double proj = grad.dot(l);
    if (std::abs(proj) < 1e-12 * std::max(1.0, grad.norm() * l.norm()))
        throw ZeroGradientError("gradient projection on the length vector vanished");
    return proj;
}

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace

int morse_index(const Eigen::MatrixXd& m, double rel_tol, double abs_tol) {
    if (m.rows() == 0)
        return 0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const Eigen::VectorXd lambda = es.eigenvalues();
    const double tol = std::max(rel_tol * lambda.cwiseAbs().maxCoeff(), abs_tol);
    int negatives = 0;
    for (int i = 0; i < lambda.size(); ++i) {
        if (std::abs(lambda[i]) <= tol)
            throw DegenerateHessianError("Hessian eigenvalue " + std::to_string(lambda[i]) +
                                         " inside the zero band " + std::to_string(tol));
        if (lambda[i] < 0)
            negatives += 1;
    }
    return negatives;
}

int surplus_morse(const SecularContext& ctx, const TorusPoint& x) {
    if (ctx.beta() == 0)
        return 0;
    const double proj = gradient_projection(ctx, x);
    const Eigen::MatrixXd h = ctx.hessian_alpha(x);
    return morse_index(-h / proj);
}

int surplus_morse_complex(const SecularContext& ctx, const TorusPoint& x) {
    if (ctx.beta() == 0)
        return 0;
    const Eigen::VectorXcd grad = ctx.gradient_x_complex(x);
    const Eigen::VectorXd l = ctx.lengths();
    const Complex proj = grad.cwiseProduct(l.cast<Complex>()).sum();
    if (std::abs(proj) < 1e-12 * std::max(1.0, grad.norm() * l.norm()))
        throw ZeroGradientError("complex gradient projection vanished");
    const Eigen::MatrixXcd m = -ctx.hessian_alpha_complex(x) / proj;
    // on the manifold the quotient is real; away from it the imaginary
    // part measures the distance, so allow a loose band
    const double re_norm = m.real().cwiseAbs().maxCoeff();
    if (m.imag().cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, re_norm))
        throw Error("complex-route Morse matrix has a non-real part; point not on the manifold");
    return morse_index(m.real());
}

std::vector<int> local_surplus(const SecularContext& ctx, const TorusPoint& x,
                               const BlockDecomposition& dec) {
    const int B = static_cast<int>(dec.blocks.size());
    if (ctx.beta() == 0)
        return std::vector<int>(B, 0);
    const double proj = gradient_projection(ctx, x);
    const Eigen::MatrixXd h = ctx.hessian_alpha(x);
    const double hnorm = spectral_norm(h);

    for (int i = 0; i < h.rows(); ++i)
        for (int j = 0; j < h.cols(); ++j)
            if (dec.flux_block[i] != dec.flux_block[j] && std::abs(h(i, j)) > 1e-8 * hnorm)
                throw Error("off-block Hessian entry " + std::to_string(h(i, j)) +
                            " violates the block structure");

    std::vector<int> sigma(B, 0);
    for (int b = 0; b < B; ++b) {
        std::vector<int> idx;
        for (int j = 0; j < ctx.beta(); ++j)
            if (dec.flux_block[j] == b)
                idx.push_back(j);
        Eigen::MatrixXd sub(idx.size(), idx.size());
        for (size_t p = 0; p < idx.size(); ++p)
            for (size_t q = 0; q < idx.size(); ++q)
                sub(p, q) = h(idx[p], idx[q]);
        sigma[b] = morse_index(-sub / proj);
    }
    return sigma;
}

SurplusSample surplus_sample(const SecularContext& ctx, const BlockDecomposition& dec,
                             const EigenvalueRecord& record, bool with_direct) {
    SurplusSample s;
    s.n = record.n;
    s.k = record.k;
    if (record.cls != SpectralClass::Generic || record.flagged) {
        s.flag = record.flagged ? record.flag : "not generic";
        return s;
    }
    const int beta = ctx.beta();
    try {
        s.sigma_morse = surplus_morse(ctx, record.x);
        s.local = local_surplus(ctx, record.x, dec);
    } catch (const DegenerateHessianError& err) {
        s.flag = err.what();
        return s;
    } catch (const ZeroGradientError& err) {
        s.flag = err.what();
        return s;
    }
    if (s.sigma_morse < 0 || s.sigma_morse > beta)
        throw Error("Morse surplus out of [0, beta]");
    int local_sum = 0;
    for (int v : s.local)
        local_sum += v;
    if (local_sum != s.sigma_morse)
        throw Error("local surpluses do not sum to the total");

    if (with_direct) {
        try {
            const BondAmplitudes amp = amplitudes(ctx, record.x);
            const auto waves = edge_waves(ctx, record.x, record.k, amp);
            const NodalData nodal = nodal_count(ctx.graph(), record.k, record.n, waves);
            s.sigma_direct = static_cast<int>(nodal.surplus);
        } catch (const AmbiguousZeroError& err) {
            s.flag = err.what();
            return s;
        } catch (const NotSimpleError& err) {
            s.flag = err.what();
            return s;
        }
        if (s.sigma_direct < 0 || s.sigma_direct > beta)
            throw Error("direct surplus " + std::to_string(s.sigma_direct) + " out of [0, beta]");
    }
    s.ok = true;
    return s;
}

SurplusDistribution accumulate_distribution(const SecularContext& ctx,
                                            const BlockDecomposition& dec,
                                            const std::vector<EigenvalueRecord>& records,
                                            bool parallel) {
    SurplusDistribution d;
    d.beta = ctx.beta();
    for (const auto& b : dec.blocks)
        d.block_beta.push_back(b.beta);
    d.counts.assign(d.beta + 1, 0);
    d.scanned = static_cast<long>(records.size());

    std::vector<SurplusSample> samples(records.size());
    std::vector<std::string> errors(records.size());
    auto process = [&](size_t i) {
        try {
            samples[i] = surplus_sample(ctx, dec, records[i], true);
        } catch (const std::exception& ex) {
            errors[i] = ex.what();  // exceptions must not cross the omp join
        }
    };
    if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 32)
#endif
        for (long i = 0; i < static_cast<long>(records.size()); ++i)
            process(i);
    } else {
        for (size_t i = 0; i < records.size(); ++i)
            process(i);
    }
    for (const auto& err : errors)
        if (!err.empty())
            throw Error(err);

    for (size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        const auto& s = samples[i];
        if (rec.cls != SpectralClass::Generic)
            continue;
        d.generic += 1;
        if (!s.ok) {
            d.excluded += 1;
            continue;
        }
        if (s.sigma_direct >= 0 && s.sigma_direct != s.sigma_morse) {
            d.mismatches += 1;
            continue;
        }
        d.counts[s.sigma_morse] += 1;
        d.samples += 1;
        d.joint[s.local] += 1;
    }
    return d;
}

SurplusDistribution estimate_distribution(const SecularContext& ctx, ScanConfig scan, long N) {
    scan.count = N;
    scan.kmax.reset();
    const auto records = scan_spectrum(ctx, scan);
    const auto dec = block_decomposition(ctx.graph());
    SurplusDistribution d = accumulate_distribution(ctx, dec, records, scan.parallel);
    if (d.samples < 100)
        throw Error("only " + std::to_string(d.samples) +
                    " generic samples accumulated; increase N");
    return d;
}

std::vector<double> binomial_half(int beta) {
    std::vector<double> p(beta + 1);
    double binom = 1.0;
    const double scale = std::ldexp(1.0, -beta);  // 2^-beta
    for (int s = 0; s <= beta; ++s) {
        p[s] = binom * scale;
        binom = binom * (beta - s) / (s + 1.0);
    }
    return p;
}

DistributionDiagnostics distribution_diagnostics(const SurplusDistribution& d) {
    if (d.samples == 0)
        throw Error("empty distribution");
    DistributionDiagnostics out;
    out.P.resize(d.beta + 1);
    for (int s = 0; s <= d.beta; ++s)
        out.P[s] = static_cast<double>(d.counts[s]) / d.samples;
    for (int s = 0; s <= d.beta; ++s)
        out.mean += s * out.P[s];
    out.beta_recovered = 2.0 * out.mean;
    for (int s = 0; s <= d.beta; ++s)
        out.symmetry_residual = std::max(out.symmetry_residual,
                                         std::abs(out.P[s] - out.P[d.beta - s]));
    const auto binom = binomial_half(d.beta);
    double tv = 0.0;
    for (int s = 0; s <= d.beta; ++s)
        tv += std::abs(out.P[s] - binom[s]);
    out.tv_binomial = 0.5 * tv;
    return out;
}

std::vector<ConditionalTable> conditional_tables(const SurplusDistribution& d) {
    const int B = static_cast<int>(d.block_beta.size());
    if (B < 2)
        throw Error("conditional tables need at least two blocks");
    std::vector<ConditionalTable> tables;
    for (int b = 0; b < B; ++b) {
        ConditionalTable table;
        table.block = b;
        std::map<std::vector<int>, std::vector<long>> rows;
        for (const auto& [tuple, count] : d.joint) {
            std::vector<int> given;
            for (int j = 0; j < B; ++j)
                if (j != b)
                    given.push_back(tuple[j]);
            auto& histogram = rows[given];
            histogram.resize(d.block_beta[b] + 1, 0);
            histogram[tuple[b]] += count;
        }
        for (auto& [given, histogram] : rows) {
            ConditionalTable::Row row;
            row.given = given;
            for (long c : histogram)
                row.samples += c;
            for (long c : histogram)
                row.P.push_back(static_cast<double>(c) / row.samples);
            table.rows.push_back(std::move(row));
        }
        tables.push_back(std::move(table));
    }
    return tables;
}

InversionReport inversion_check(const SecularContext& ctx, const TorusPoint& x) {
    InversionReport report;
    report.sigma = surplus_morse(ctx, x);
    const TorusPoint y = x.inverted();
    const double fy = ctx.FR0(y);
    report.on_manifold = std::abs(fy) < 1e-8;
    const Classification cls = classify_point(ctx, y, 0.0);
    report.image_generic = cls.cls == SpectralClass::Generic && !cls.flagged;
    if (report.on_manifold && report.image_generic) {
        report.sigma_image = surplus_morse(ctx, y);
        report.symmetric = report.sigma_image == ctx.beta() - report.sigma;
    }
    return report;
}

BridgeReflectionReport bridge_reflection_check(const SecularContext& ctx,
                                               const BlockDecomposition& dec,
                                               const Splitting& split, const TorusPoint& x) {
    BridgeReflectionReport report;
    report.image = bridge_reflection_map(ctx, split, x);
    const double fy = ctx.FR0(report.image);
    report.on_manifold = std::abs(fy) < 1e-8;
    const Classification cls = classify_point(ctx, report.image, 0.0);
    report.image_generic = cls.cls == SpectralClass::Generic && !cls.flagged;
    if (!(report.on_manifold && report.image_generic))
        return report;

    // blocks whose edges lie in part 1 keep their surplus, part-2 blocks flip
    const auto before = local_surplus(ctx, x, dec);
    const auto after = local_surplus(ctx, report.image, dec);
    std::vector<char> in_part1(ctx.graph().edge_count(), 0);
    for (int e : split.part1_edges)
        in_part1[e] = 1;
    report.part1_fixed = true;
    report.part2_flipped = true;
    for (size_t b = 0; b < dec.blocks.size(); ++b) {
        const bool part1 = in_part1[dec.blocks[b].edges.front()];
        if (part1) {
            if (after[b] != before[b])
                report.part1_fixed = false;
        } else {
            if (after[b] != dec.blocks[b].beta - before[b])
                report.part2_flipped = false;
        }
    }
    return report;
}

} // namespace qg
