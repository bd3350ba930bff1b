#include "qg/eigenfunction.hpp"

#include <cmath>
#include <numbers>

namespace qg {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

/// f at the origin vertex of bond b: a_b e^{-i x_e} + a_rev(b).
Complex value_from_bond(const TorusPoint& x, const Eigen::VectorXcd& a, int bond) {
    const int e = bond / 2;
    const int rev = (bond % 2 == 0) ? bond + 1 : bond - 1;
    return a[bond] * std::polar(1.0, -x[e]) + a[rev];
}

/// Bonds originating at each vertex, in bond order.
std::vector<std::vector<int>> origin_bonds(const MetricGraph& g) {
    std::vector<std::vector<int>> out(g.vertex_count());
    for (int e = 0; e < g.edge_count(); ++e) {
        out[g.edge(e).u].push_back(2 * e);
        out[g.edge(e).v].push_back(2 * e + 1);
    }
    return out;
}

double max_edge_amplitude(const MetricGraph& g, const Eigen::VectorXcd& a) {
    double best = 0.0;
    for (int e = 0; e < g.edge_count(); ++e)
        best = std::max(best, std::hypot(std::abs(a[2 * e]), std::abs(a[2 * e + 1])));
    return best;
}

} // namespace

std::vector<double> vertex_value_magnitudes(const SecularContext& ctx, const TorusPoint& x,
                                            const Eigen::VectorXcd& null_vector) {
    const MetricGraph& g = ctx.graph();
    auto bonds = origin_bonds(g);
    const double scale = std::max(max_edge_amplitude(g, null_vector), 1e-300);
    std::vector<double> out(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v)
        out[v] = std::abs(value_from_bond(x, null_vector, bonds[v].front())) / scale;
    return out;
}

BondAmplitudes amplitudes(const SecularContext& ctx, const TorusPoint& x) {
    NullSpaceInfo ns = ctx.null_space(x);
    if (ns.multiplicity != 1)
        throw NotSimpleError("null space dimension is " + std::to_string(ns.multiplicity));

    const MetricGraph& g = ctx.graph();
    auto bonds = origin_bonds(g);
    int best_vertex = 0;
    double best = -1.0;
    for (int v = 0; v < g.vertex_count(); ++v) {
        double m = std::abs(value_from_bond(x, ns.vector, bonds[v].front()));
        if (m > best) {
            best = m;
            best_vertex = v;
        }
    }
    Complex pivot = value_from_bond(x, ns.vector, bonds[best_vertex].front());
    if (std::abs(pivot) < 1e-10) {
        // every vertex value vanishes (a point outside the generic set);
        // calibrate on the largest endpoint datum instead, which is also
        // real for the real representative
        for (int e = 0; e < g.edge_count(); ++e) {
            const Complex f0 = ns.vector[2 * e] * std::polar(1.0, -x[e]) + ns.vector[2 * e + 1];
            const Complex d0 =
                Complex(0, 1) * (ns.vector[2 * e] * std::polar(1.0, -x[e]) - ns.vector[2 * e + 1]);
            for (const Complex& c : {f0, d0})
                if (std::abs(c) > std::abs(pivot))
                    pivot = c;
        }
    }
    BondAmplitudes amp;
    amp.a = ns.vector * std::polar(1.0, -std::arg(pivot));

    // realness of vertex data after calibration
    for (int v = 0; v < g.vertex_count(); ++v) {
        for (int b : bonds[v]) {
            const int e = b / 2;
            const int rev = (b % 2 == 0) ? b + 1 : b - 1;
            const Complex f0 = amp.a[b] * std::polar(1.0, -x[e]) + amp.a[rev];
            const Complex d0 = Complex(0, 1) * (amp.a[b] * std::polar(1.0, -x[e]) - amp.a[rev]);
            if (std::abs(f0.imag()) > 1e-8 || std::abs(d0.imag()) > 1e-8)
                throw Error("eigenfunction real representative failed realness check");
        }
    }
    return amp;
}

std::vector<double> vertex_values(const SecularContext& ctx, const TorusPoint& x,
                                  const BondAmplitudes& amp) {
    const MetricGraph& g = ctx.graph();
    auto bonds = origin_bonds(g);
    std::vector<double> out(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v) {
        double value = 0.0;
        bool first = true;
        for (int b : bonds[v]) {
            const Complex f = value_from_bond(x, amp.a, b);
            if (first) {
                value = f.real();
                first = false;
            } else if (std::abs(f.real() - value) > 1e-8) {
                throw Error("inconsistent vertex values across incident bonds: " +
                            std::to_string(value) + " vs " + std::to_string(f.real()));
            }
        }
        out[v] = value;
    }
    return out;
}

std::vector<EdgeWave> edge_waves(const SecularContext& ctx, const TorusPoint& x, double k,
                                 const BondAmplitudes& amp) {
    if (!(k > 0.0))
        throw Error("edge waves require k > 0");
    const MetricGraph& g = ctx.graph();
    std::vector<EdgeWave> waves(g.edge_count());
    for (int e = 0; e < g.edge_count(); ++e) {
        // f_e(0) and f_e'(0)/k at the origin endpoint of the edge
        const Complex f0 = amp.a[2 * e] * std::polar(1.0, -x[e]) + amp.a[2 * e + 1];
        const Complex d0 = Complex(0, 1) * (amp.a[2 * e] * std::polar(1.0, -x[e]) - amp.a[2 * e + 1]);
        EdgeWave w;
        w.amplitude = std::hypot(f0.real(), d0.real());
        w.phase = std::atan2(d0.real(), f0.real());
        if (w.phase < 0.0)
            w.phase += two_pi;
        waves[e] = w;
    }
    return waves;
}

NodalData nodal_count(const MetricGraph& g, double k, long n, const std::vector<EdgeWave>& waves) {
    constexpr double endpoint_tol = 1e-8;
    NodalData data;
    data.per_edge.resize(g.edge_count());
    double max_amp = 0.0;
    for (const auto& w : waves)
        max_amp = std::max(max_amp, w.amplitude);
    for (int e = 0; e < g.edge_count(); ++e) {
        const EdgeWave& w = waves[e];
        if (w.amplitude < 1e-10 * max_amp)
            throw AmbiguousZeroError("edge " + std::to_string(e) + " carries no amplitude");
        const double l = g.edge(e).length;
        // zeros at t_m = (phase + pi/2 + m pi) / k; count integers m with
        // 0 < t_m < l and refuse when one grazes an endpoint
        const double u_lo = (-w.phase - std::numbers::pi / 2.0) / std::numbers::pi;
        const double u_hi = (k * l - w.phase - std::numbers::pi / 2.0) / std::numbers::pi;
        const long m_first = static_cast<long>(std::ceil(u_lo));
        const long m_last = static_cast<long>(std::floor(u_hi));
        auto zero_at = [&](long m) {
            return (w.phase + std::numbers::pi / 2.0 + static_cast<double>(m) * std::numbers::pi) / k;
        };
        for (long m : {m_first - 1, m_first, m_last, m_last + 1}) {
            const double t = zero_at(m);
            if (std::abs(t) < endpoint_tol || std::abs(t - l) < endpoint_tol)
                throw AmbiguousZeroError("zero grazes an endpoint of edge " + std::to_string(e));
        }
        data.per_edge[e] = static_cast<int>(std::max<long>(0, m_last - m_first + 1));
        data.total += data.per_edge[e];
    }
    data.surplus = data.total - (n - 1);
    return data;
}

double current_conservation_residual(const MetricGraph& g, double k,
                                     const std::vector<EdgeWave>& waves) {
    double max_amp = 0.0;
    for (const auto& w : waves)
        max_amp = std::max(max_amp, w.amplitude);
    const double scale = std::max(k * max_amp, 1e-300);

    std::vector<double> sum(g.vertex_count(), 0.0);
    for (int e = 0; e < g.edge_count(); ++e) {
        const EdgeWave& w = waves[e];
        const double l = g.edge(e).length;
        // derivative into the edge: +f'(0) at the origin, -f'(l) at the far end
        sum[g.edge(e).u] += w.amplitude * k * std::sin(w.phase);
        sum[g.edge(e).v] += w.amplitude * k * std::sin(k * l - w.phase);
    }
    double worst = 0.0;
    for (int v = 0; v < g.vertex_count(); ++v)
        if (g.condition(v) == VertexCondition::Neumann)
            worst = std::max(worst, std::abs(sum[v]) / scale);
    return worst;
}

} // namespace qg
