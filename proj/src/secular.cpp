#include "qg/secular.hpp"

#include <cmath>
#include <numbers>

namespace qg {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap(double t) {
    double r = std::fmod(t, two_pi);
    if (r < 0.0)
        r += two_pi;
    if (r == two_pi)
        r = 0.0;
    return r;
}

} // namespace

TorusPoint::TorusPoint(Eigen::VectorXd coords) : x_(std::move(coords)) {
    for (int i = 0; i < x_.size(); ++i)
        x_[i] = wrap(x_[i]);
}

TorusPoint::TorusPoint(const std::vector<double>& coords)
    : TorusPoint(Eigen::Map<const Eigen::VectorXd>(coords.data(), coords.size())) {}

TorusPoint TorusPoint::flow(const Eigen::VectorXd& lengths, double k) {
    Eigen::VectorXd x(lengths.size());
    for (int i = 0; i < lengths.size(); ++i)
        x[i] = wrap(k * lengths[i]);
    return TorusPoint(std::move(x));
}

TorusPoint TorusPoint::inverted() const {
    Eigen::VectorXd y = -x_;
    return TorusPoint(std::move(y));
}

TorusPoint TorusPoint::shifted(int coord, double delta) const {
    Eigen::VectorXd y = x_;
    y[coord] += delta;
    return TorusPoint(std::move(y));
}

FluxVector::FluxVector(Eigen::VectorXd alpha) : a_(std::move(alpha)) {
    for (int i = 0; i < a_.size(); ++i)
        a_[i] = wrap(a_[i]);
}

FluxVector FluxVector::shifted(int coord, double delta) const {
    Eigen::VectorXd b = a_;
    b[coord] += delta;
    return FluxVector(std::move(b));
}

FluxVector FluxVector::negated() const {
    Eigen::VectorXd b = -a_;
    return FluxVector(std::move(b));
}

BondFrame make_bond_frame(int vertex_count,
                          const std::vector<std::pair<int, int>>& edge_endpoints,
                          const std::vector<VertexCondition>& conditions,
                          const std::vector<int>& lead_vertices) {
    const int M = static_cast<int>(lead_vertices.size());
    const int E = static_cast<int>(edge_endpoints.size());
    const int n = M + 2 * E;

    BondFrame f;
    f.leads = M;
    f.origin.resize(n);
    f.terminus.resize(n);
    f.reversal.resize(n);

    f.degree.assign(vertex_count, 0);
    std::vector<int>& degree = f.degree;
    for (int j = 0; j < M; ++j) {
        f.origin[j] = f.terminus[j] = lead_vertices[j];
        f.reversal[j] = j;
        degree[lead_vertices[j]] += 1;
    }
    for (int e = 0; e < E; ++e) {
        int fwd = M + 2 * e, rev = fwd + 1;
        auto [u, v] = edge_endpoints[e];
        f.origin[fwd] = u;
        f.terminus[fwd] = v;
        f.origin[rev] = v;
        f.terminus[rev] = u;
        f.reversal[fwd] = rev;
        f.reversal[rev] = fwd;
        degree[u] += 1;
        degree[v] += 1;
    }

    f.S = Eigen::MatrixXd::Zero(n, n);
    for (int b = 0; b < n; ++b) {
        const int t = f.terminus[b];
        const double d = static_cast<double>(degree[t]);
        if (conditions[t] == VertexCondition::Dirichlet) {
            f.S(f.reversal[b], b) = -1.0;
            continue;
        }
        for (int bp = 0; bp < n; ++bp) {
            if (f.origin[bp] != t)
                continue;
            f.S(bp, b) = (bp == f.reversal[b]) ? 2.0 / d - 1.0 : 2.0 / d;
        }
    }
    return f;
}

Eigen::MatrixXd bond_scattering_matrix(const MetricGraph& g) {
    std::vector<std::pair<int, int>> ends;
    std::vector<VertexCondition> conds;
    for (const auto& e : g.edges())
        ends.push_back({e.u, e.v});
    for (const auto& v : g.vertices())
        conds.push_back(v.condition);
    return make_bond_frame(g.vertex_count(), ends, conds).S;
}

SecularContext::SecularContext(MetricGraph g) : SecularContext(std::move(g), CutSet{}) {
    cut_ = spanning_cut(graph_);
    init();
}

SecularContext::SecularContext(MetricGraph g, CutSet cut)
    : graph_(std::move(g)), cut_(std::move(cut)) {
    if (!cut_.flux_of_edge.empty())
        init();
}

void SecularContext::init() {
    std::vector<std::pair<int, int>> ends;
    std::vector<VertexCondition> conds;
    for (const auto& e : graph_.edges())
        ends.push_back({e.u, e.v});
    for (const auto& v : graph_.vertices())
        conds.push_back(v.condition);
    frame_ = make_bond_frame(graph_.vertex_count(), ends, conds);

    flux_sign_.assign(2 * graph_.edge_count(), 0.0);
    for (int j = 0; j < cut_.size(); ++j) {
        int e = cut_.edges[j];
        flux_sign_[2 * e] = static_cast<double>(cut_.orientation[j]);
        flux_sign_[2 * e + 1] = -static_cast<double>(cut_.orientation[j]);
    }

    double det_s = Eigen::PartialPivLU<Eigen::MatrixXd>(frame_.S).determinant();
    if (std::abs(std::abs(det_s) - 1.0) > 1e-9)
        throw RealnessError("bond scattering matrix determinant is not +-1");
    sqrt_det_s_ = det_s > 0 ? Complex(1.0, 0.0) : Complex(0.0, 1.0);

    // one global sign per graph: F_R > 0 at the first coarse-grid probe
    // with |F_R| above 1e-3 (lexicographic order, 4 phases per coordinate)
    sign_ = 1;
    const int E = graph_.edge_count();
    const FluxVector a0 = FluxVector::zero(beta());
    std::vector<int> idx(E, 0);
    double best = 0.0;
    int best_sign = 1;
    long probes = 0;
    while (true) {
        Eigen::VectorXd x(E);
        for (int i = 0; i < E; ++i)
            x[i] = (2.0 * idx[i] + 1.0) * std::numbers::pi / 4.0;
        double v = FR_raw(TorusPoint(std::move(x)), a0);
        if (std::abs(v) > 1e-3) {
            sign_ = v > 0 ? 1 : -1;
            return;
        }
        if (std::abs(v) > best) {
            best = std::abs(v);
            best_sign = v > 0 ? 1 : -1;
        }
        if (++probes >= 65536)
            break;
        int i = E - 1;
        while (i >= 0 && ++idx[i] == 4) {
            idx[i] = 0;
            --i;
        }
        if (i < 0)
            break;
    }
    sign_ = best_sign;
}

Eigen::VectorXd SecularContext::lengths() const {
    Eigen::VectorXd l(graph_.edge_count());
    for (int e = 0; e < graph_.edge_count(); ++e)
        l[e] = graph_.edge(e).length;
    return l;
}

Eigen::MatrixXcd SecularContext::secular_matrix(const TorusPoint& x, const FluxVector& a) const {
    const int n = bond_count();
    Eigen::MatrixXcd m(n, n);
    for (int b = 0; b < n; ++b) {
        double phase = x[b / 2];
        if (flux_sign_[b] != 0.0)
            phase += flux_sign_[b] * a[cut_.flux_of_edge[b / 2]];
        const Complex factor = -std::polar(1.0, phase);
        for (int c = 0; c < n; ++c)
            m(b, c) = factor * frame_.S(b, c);
        m(b, b) += 1.0;
    }
    return m;
}

Complex SecularContext::F(const TorusPoint& x, const FluxVector& a) const {
    return Eigen::PartialPivLU<Eigen::MatrixXcd>(secular_matrix(x, a)).determinant();
}

Eigen::MatrixXcd SecularContext::flow_unitary(const TorusPoint& x) const {
    const int n = bond_count();
    Eigen::MatrixXcd u(n, n);
    for (int b = 0; b < n; ++b) {
        const Complex factor = std::polar(1.0, x[b / 2]);
        for (int c = 0; c < n; ++c)
            u(b, c) = factor * frame_.S(b, c);
    }
    return u;
}

double SecularContext::FR_raw(const TorusPoint& x, const FluxVector& a) const {
    const Complex f = F(x, a);
    const Complex value = std::polar(1.0, -x.coords().sum()) * f / sqrt_det_s_;
    const double scale = std::max(1.0, std::abs(value));
    if (std::abs(value.imag()) > 1e-8 * scale)
        throw RealnessError("rescaled secular function is not real: imag = " +
                            std::to_string(value.imag()));
    return value.real();
}

double SecularContext::FR(const TorusPoint& x, const FluxVector& a) const {
    return sign_ * FR_raw(x, a);
}

double SecularContext::realness_residual(const TorusPoint& x, const FluxVector& a) const {
    const Complex value = std::polar(1.0, -x.coords().sum()) * F(x, a) / sqrt_det_s_;
    return std::abs(value.imag()) / std::max(1.0, std::abs(value));
}

double SecularContext::FR0(const TorusPoint& x) const {
    return FR(x, FluxVector::zero(beta()));
}

SecularValue SecularContext::eval(const TorusPoint& x, const FluxVector& a) const {
    SecularValue v;
    v.F = F(x, a);
    v.FR = FR(x, a);
    return v;
}

NullSpaceInfo SecularContext::null_space(const TorusPoint& x, double rel_tol) const {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(secular_matrix(x, FluxVector::zero(beta())),
                                           Eigen::ComputeThinV);
    NullSpaceInfo info;
    info.singular_values = svd.singularValues();
    const double largest = info.singular_values[0];
    info.multiplicity = 0;
    for (int i = 0; i < info.singular_values.size(); ++i)
        if (info.singular_values[i] < rel_tol * largest)
            info.multiplicity += 1;
    info.vector = svd.matrixV().col(info.singular_values.size() - 1);
    return info;
}

namespace {

/// Derivative weights at phase 0 of the trig interpolant through 5
/// equispaced samples f(2 pi m / 5): exact for degree <= 2.
constexpr int kPhases = 5;

double deriv_weight(int m) {
    const double d = two_pi * m / kPhases;
    return (2.0 * std::sin(d) + 4.0 * std::sin(2.0 * d)) / kPhases;
}

} // namespace

Eigen::VectorXd SecularContext::gradient_x(const TorusPoint& x) const {
    const int E = graph_.edge_count();
    const FluxVector a0 = FluxVector::zero(beta());
    Eigen::VectorXd grad(E);
    for (int e = 0; e < E; ++e) {
        double d = 0.0;
        for (int m = 1; m < kPhases; ++m)
            d += deriv_weight(m) * FR(x.shifted(e, two_pi * m / kPhases), a0);
        grad[e] = d;
    }
    return grad;
}

Eigen::MatrixXd SecularContext::hessian_alpha(const TorusPoint& x) const {
    const int B = beta();
    Eigen::MatrixXd h(B, B);
    if (B == 0)
        return h;
    const FluxVector a0 = FluxVector::zero(B);
    const double f0 = FR(x, a0);
    const double half_pi = std::numbers::pi / 2.0;
    for (int j = 0; j < B; ++j) {
        const double fp = FR(x, a0.shifted(j, half_pi));
        const double fm = FR(x, a0.shifted(j, -half_pi));
        h(j, j) = 0.5 * (fp + fm) - f0;  // exact: degree-1 trig polynomial
        for (int k = j + 1; k < B; ++k) {
            const double fpp = FR(x, a0.shifted(j, half_pi).shifted(k, half_pi));
            const double fpm = FR(x, a0.shifted(j, half_pi).shifted(k, -half_pi));
            const double fmp = FR(x, a0.shifted(j, -half_pi).shifted(k, half_pi));
            const double fmm = FR(x, a0.shifted(j, -half_pi).shifted(k, -half_pi));
            h(j, k) = h(k, j) = (fpp - fpm - fmp + fmm) / 4.0;
        }
    }
    return h;
}

Eigen::VectorXcd SecularContext::gradient_x_complex(const TorusPoint& x) const {
    const int E = graph_.edge_count();
    const FluxVector a0 = FluxVector::zero(beta());
    Eigen::VectorXcd grad(E);
    for (int e = 0; e < E; ++e) {
        Complex d = 0.0;
        for (int m = 1; m < kPhases; ++m)
            d += deriv_weight(m) * F(x.shifted(e, two_pi * m / kPhases), a0);
        grad[e] = d;
    }
    return grad;
}

Eigen::MatrixXcd SecularContext::hessian_alpha_complex(const TorusPoint& x) const {
    const int B = beta();
    Eigen::MatrixXcd h(B, B);
    if (B == 0)
        return h;
    const FluxVector a0 = FluxVector::zero(B);
    const Complex f0 = F(x, a0);
    const double half_pi = std::numbers::pi / 2.0;
    for (int j = 0; j < B; ++j) {
        const Complex fp = F(x, a0.shifted(j, half_pi));
        const Complex fm = F(x, a0.shifted(j, -half_pi));
        h(j, j) = 0.5 * (fp + fm) - f0;
        for (int k = j + 1; k < B; ++k) {
            const Complex fpp = F(x, a0.shifted(j, half_pi).shifted(k, half_pi));
            const Complex fpm = F(x, a0.shifted(j, half_pi).shifted(k, -half_pi));
            const Complex fmp = F(x, a0.shifted(j, -half_pi).shifted(k, half_pi));
            const Complex fmm = F(x, a0.shifted(j, -half_pi).shifted(k, -half_pi));
            h(j, k) = h(k, j) = (fpp - fpm - fmp + fmm) / 4.0;
        }
    }
    return h;
}

FdReport SecularContext::fd_crosscheck(const TorusPoint& x, double h) const {
    FdReport report;
    const int E = graph_.edge_count();
    const int B = beta();
    const FluxVector a0 = FluxVector::zero(B);

    const Eigen::VectorXd grad = gradient_x(x);
    double gmax = std::max(1.0, grad.cwiseAbs().maxCoeff());
    for (int e = 0; e < E; ++e) {
        const double fd = (FR(x.shifted(e, h), a0) - FR(x.shifted(e, -h), a0)) / (2.0 * h);
        report.grad_residual = std::max(report.grad_residual, std::abs(fd - grad[e]) / gmax);
    }

    if (B == 0)
        return report;
    const Eigen::MatrixXd hess = hessian_alpha(x);
    const double f0 = FR(x, a0);
    double hmax = std::max(1.0, hess.cwiseAbs().maxCoeff());
    for (int j = 0; j < B; ++j) {
        const double fp = FR(x, a0.shifted(j, h));
        const double fm = FR(x, a0.shifted(j, -h));
        const double fd = (fp + fm - 2.0 * f0) / (h * h);
        report.hess_residual = std::max(report.hess_residual, std::abs(fd - hess(j, j)) / hmax);
        for (int k = j + 1; k < B; ++k) {
            const double fpp = FR(x, a0.shifted(j, h).shifted(k, h));
            const double fpm = FR(x, a0.shifted(j, h).shifted(k, -h));
            const double fmp = FR(x, a0.shifted(j, -h).shifted(k, h));
            const double fmm = FR(x, a0.shifted(j, -h).shifted(k, -h));
            const double fd2 = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            report.hess_residual = std::max(report.hess_residual, std::abs(fd2 - hess(j, k)) / hmax);
        }
    }
    return report;
}

} // namespace qg
