#include "qg/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "qg/rng.hpp"

namespace qg {

namespace {

constexpr double w_set_tol = 1e-10;

/// One side of a splitting rebuilt as a lead-extended bond frame.  Local
/// edge j corresponds to parent edge edges[j]; leads follow the connector
/// order of the splitting.
struct SideFrame {
    BondFrame frame;
    std::vector<int> edges;        // parent edge per local edge
    std::vector<int> local_vertex; // parent vertex -> local index (-1 outside)
};

SideFrame build_side(const MetricGraph& g, const std::vector<int>& part_edges,
                     const std::vector<int>& attach_vertices) {
    std::set<int> vset(attach_vertices.begin(), attach_vertices.end());
    for (int e : part_edges) {
        vset.insert(g.edge(e).u);
        vset.insert(g.edge(e).v);
    }
    SideFrame side;
    side.local_vertex.assign(g.vertex_count(), -1);
    std::vector<VertexCondition> conds;
    for (int v : vset) {
        side.local_vertex[v] = static_cast<int>(conds.size());
        conds.push_back(g.condition(v));
    }
    std::vector<std::pair<int, int>> ends;
    side.edges = part_edges;
    std::sort(side.edges.begin(), side.edges.end());
    for (int e : side.edges)
        ends.push_back({side.local_vertex[g.edge(e).u], side.local_vertex[g.edge(e).v]});
    std::vector<int> leads;
    for (int v : attach_vertices)
        leads.push_back(side.local_vertex[v]);
    side.frame = make_bond_frame(static_cast<int>(conds.size()), ends, conds, leads);
    return side;
}

struct InteriorFactors {
    Eigen::MatrixXcd Z;
    Complex D = 1.0;
    double smallest_singular = 1.0;
};

/// Z = r + t' (Id - P S~)^{-1} P t and D = det(Id - P S~) for the diagonal
/// phase matrix P given per graph bond.
InteriorFactors lead_factors(const BondFrame& frame, const Eigen::VectorXcd& phases,
                             bool need_z = true) {
    const int M = frame.leads;
    const int n = frame.labels() - M;
    InteriorFactors out;
    if (n == 0) {
        out.Z = frame.S.topLeftCorner(M, M);
        return out;
    }
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n);
    for (int b = 0; b < n; ++b)
        a.row(b) -= phases[b] * frame.S.row(M + b).segment(M, n).cast<Complex>();
    out.D = Eigen::PartialPivLU<Eigen::MatrixXcd>(a).determinant();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.smallest_singular = svd.singularValues()(n - 1);
    if (!need_z)
        return out;
    if (out.smallest_singular < w_set_tol)
        throw InWSetError("Id - e^{ix+ia} S~ is singular: eigenfunction vanishing at all leads");
    Eigen::MatrixXcd pt(n, M);
    for (int b = 0; b < n; ++b)
        pt.row(b) = phases[b] * frame.S.row(M + b).head(M).cast<Complex>();
    out.Z = frame.S.topLeftCorner(M, M).cast<Complex>() +
            frame.S.topRightCorner(M, n).cast<Complex>() * svd.solve(pt);
    return out;
}

/// Per-bond phases of a side frame: parent torus coordinate plus the
/// parent flux with its cut orientation.
Eigen::VectorXcd side_phases(const SecularContext& ctx, const SideFrame& side,
                             const TorusPoint& x, const FluxVector& a) {
    const CutSet& cut = ctx.cut();
    Eigen::VectorXcd phases(2 * side.edges.size());
    for (size_t j = 0; j < side.edges.size(); ++j) {
        const int pe = side.edges[j];
        double flux = 0.0;
        if (cut.flux_of_edge[pe] >= 0)
            flux = cut.orientation[cut.flux_of_edge[pe]] * a[cut.flux_of_edge[pe]];
        phases[2 * j] = std::polar(1.0, x[pe] + flux);
        phases[2 * j + 1] = std::polar(1.0, x[pe] - flux);
    }
    return phases;
}

void validate_splitting(const MetricGraph& g, const Splitting& split) {
    std::vector<int> owner(g.edge_count(), 0);
    for (int e : split.part1_edges)
        owner[e] += 1;
    for (int e : split.part2_edges)
        owner[e] += 1;
    for (const auto& c : split.connectors)
        if (c.edge >= 0)
            owner[c.edge] += 1;
    for (int e = 0; e < g.edge_count(); ++e)
        if (owner[e] != 1)
            throw GraphError("splitting must cover every edge exactly once");
    if (split.connectors.empty())
        throw GraphError("splitting needs at least one connector");
    for (const auto& c : split.connectors) {
        if (c.v1 < 0 || c.v2 < 0)
            throw GraphError("connector endpoints missing");
        if (c.edge < 0 && c.v1 != c.v2)
            throw GraphError("zero-length connector must sit at a single vertex");
    }
}

} // namespace

ScatteringConfig::ScatteringConfig(MetricGraph g, std::vector<int> lead_vertices)
    : graph_(std::move(g)) {
    if (lead_vertices.empty())
        throw GraphError("scattering needs at least one lead");
    for (int v : lead_vertices)
        if (v < 0 || v >= graph_.vertex_count())
            throw GraphError("lead attachment vertex out of range");
    cut_ = spanning_cut(graph_);
    std::vector<std::pair<int, int>> ends;
    std::vector<VertexCondition> conds;
    for (const auto& e : graph_.edges())
        ends.push_back({e.u, e.v});
    for (const auto& v : graph_.vertices())
        conds.push_back(v.condition);
    frame_ = make_bond_frame(graph_.vertex_count(), ends, conds, lead_vertices);
    flux_sign_.assign(2 * graph_.edge_count(), 0.0);
    for (int j = 0; j < cut_.size(); ++j) {
        flux_sign_[2 * cut_.edges[j]] = cut_.orientation[j];
        flux_sign_[2 * cut_.edges[j] + 1] = -cut_.orientation[j];
    }
}

Eigen::MatrixXd ScatteringConfig::r() const {
    return frame_.S.topLeftCorner(leads(), leads());
}
Eigen::MatrixXd ScatteringConfig::t() const {
    return frame_.S.bottomLeftCorner(2 * graph_.edge_count(), leads());
}
Eigen::MatrixXd ScatteringConfig::t_prime() const {
    return frame_.S.topRightCorner(leads(), 2 * graph_.edge_count());
}
Eigen::MatrixXd ScatteringConfig::s_tilde() const {
    const int n = 2 * graph_.edge_count();
    return frame_.S.bottomRightCorner(n, n);
}

Eigen::VectorXcd ScatteringConfig::bond_phases(const TorusPoint& x, const FluxVector& a) const {
    Eigen::VectorXcd phases(2 * graph_.edge_count());
    for (int b = 0; b < phases.size(); ++b) {
        double phi = x[b / 2];
        if (flux_sign_[b] != 0.0)
            phi += flux_sign_[b] * a[cut_.flux_of_edge[b / 2]];
        phases[b] = std::polar(1.0, phi);
    }
    return phases;
}

Eigen::MatrixXcd ScatteringConfig::Z(const TorusPoint& x, const FluxVector& a) const {
    return lead_factors(frame_, bond_phases(x, a)).Z;
}

Complex ScatteringConfig::interior_determinant(const TorusPoint& x, const FluxVector& a) const {
    return lead_factors(frame_, bond_phases(x, a), false).D;
}

double ScatteringConfig::smallest_interior_singular(const TorusPoint& x,
                                                    const FluxVector& a) const {
    return lead_factors(frame_, bond_phases(x, a), false).smallest_singular;
}

double theta0(const ScatteringConfig& cfg, const TorusPoint& x) {
    if (cfg.leads() != 1)
        throw GraphError("theta0 needs a configuration with exactly one lead");
    const Complex z = cfg.Z(x, FluxVector::zero(cfg.cut().size()))(0, 0);
    if (std::abs(std::abs(z) - 1.0) > 1e-10)
        throw Error("one-lead scattering coefficient is not unimodular");
    // on the probed side the eigenfunction is C cos(y - theta) with y
    // measured from the attachment vertex; matching the in/out amplitude
    // convention gives Z = e^{-2 i theta}
    double theta = -0.5 * std::arg(z);
    if (theta < 0.0)
        theta += std::numbers::pi;
    return theta;
}

Splitting split_at_bridge(const MetricGraph& g, int bridge_edge) {
    const Edge& bridge = g.edge(bridge_edge);
    if (g.is_loop(bridge_edge))
        throw GraphError("a loop cannot act as a bridge connector");
    // component of the u endpoint with the bridge removed
    std::vector<char> seen(g.vertex_count(), 0);
    std::vector<int> stack{bridge.u};
    seen[bridge.u] = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int e = 0; e < g.edge_count(); ++e) {
            if (e == bridge_edge)
                continue;
            const Edge& ed = g.edge(e);
            int w = -1;
            if (ed.u == u)
                w = ed.v;
            else if (ed.v == u)
                w = ed.u;
            else
                continue;
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
        }
    }
    if (seen[bridge.v])
        throw GraphError("edge " + std::to_string(bridge_edge) + " is not a bridge");
    Splitting split;
    for (int e = 0; e < g.edge_count(); ++e) {
        if (e == bridge_edge)
            continue;
        (seen[g.edge(e).u] ? split.part1_edges : split.part2_edges).push_back(e);
    }
    split.connectors.push_back({bridge_edge, bridge.u, bridge.v});
    return split;
}

Splitting split_at_cut_vertex(const MetricGraph& g, int vertex) {
    // group the edges into flaps: two edges share a flap when they are
    // connected without passing through the vertex
    std::vector<int> flap(g.edge_count(), -1);
    int flaps = 0;
    for (int seed = 0; seed < g.edge_count(); ++seed) {
        if (flap[seed] != -1)
            continue;
        flap[seed] = flaps;
        std::vector<int> stack{seed};
        while (!stack.empty()) {
            int e = stack.back();
            stack.pop_back();
            for (int v : {g.edge(e).u, g.edge(e).v}) {
                if (v == vertex)
                    continue;
                for (int f = 0; f < g.edge_count(); ++f) {
                    if (flap[f] != -1 || (g.edge(f).u != v && g.edge(f).v != v))
                        continue;
                    flap[f] = flaps;
                    stack.push_back(f);
                }
            }
        }
        ++flaps;
    }
    if (flaps < 2)
        throw GraphError("vertex " + std::to_string(vertex) + " is not a cut vertex");
    Splitting split;
    for (int e = 0; e < g.edge_count(); ++e)
        (flap[e] == 0 ? split.part1_edges : split.part2_edges).push_back(e);
    split.connectors.push_back({-1, vertex, vertex});
    return split;
}

SplittingFactors splitting_factorization(const SecularContext& ctx, const Splitting& split,
                                         const TorusPoint& x, const FluxVector& a) {
    const MetricGraph& g = ctx.graph();
    validate_splitting(g, split);

    std::vector<int> attach1, attach2;
    for (const auto& c : split.connectors) {
        attach1.push_back(c.v1);
        attach2.push_back(c.v2);
    }
    SideFrame side1 = build_side(g, split.part1_edges, attach1);
    SideFrame side2 = build_side(g, split.part2_edges, attach2);

    InteriorFactors f1 = lead_factors(side1.frame, side_phases(ctx, side1, x, a));
    InteriorFactors f2 = lead_factors(side2.frame, side_phases(ctx, side2, x, a));

    const int M = static_cast<int>(split.connectors.size());
    const CutSet& cut = ctx.cut();
    Eigen::VectorXcd phase_fwd(M), phase_bwd(M), phase_plain(M);
    double c = 1.0;
    for (int j = 0; j < M; ++j) {
        const auto& conn = split.connectors[j];
        double x0 = 0.0, a0 = 0.0;
        if (conn.edge >= 0) {
            x0 = x[conn.edge];
            const int flux = cut.flux_of_edge[conn.edge];
            if (flux >= 0) {
                // flux oriented from part 1 to part 2
                const Edge& ed = g.edge(conn.edge);
                const int toward_2 = (ed.u == conn.v1) ? +1 : -1;
                a0 = cut.orientation[flux] * toward_2 * a[flux];
            }
        } else {
            const int d1 = side1.frame.degree[side1.local_vertex[conn.v1]];
            const int d2 = side2.frame.degree[side2.local_vertex[conn.v2]];
            c *= 2.0 * (d1 + d2 - 2) / (static_cast<double>(d1) * d2);
        }
        phase_fwd[j] = std::polar(1.0, x0 + a0);
        phase_bwd[j] = std::polar(1.0, x0 - a0);
        phase_plain[j] = std::polar(1.0, x0);
    }

    SplittingFactors out;
    out.F = ctx.F(x, a);
    out.D1 = f1.D;
    out.D2 = f2.D;
    out.Z1 = f1.Z;
    out.Z2 = f2.Z;
    out.connector_phase = phase_plain;
    out.c = c;
    const Eigen::MatrixXcd inner_matrix =
        Eigen::MatrixXcd::Identity(M, M) -
        phase_fwd.asDiagonal() * f1.Z * phase_bwd.asDiagonal() * f2.Z;
    out.inner = Eigen::PartialPivLU<Eigen::MatrixXcd>(inner_matrix).determinant();
    out.residual = std::abs(c * out.F - out.D1 * out.D2 * out.inner);
    return out;
}

std::pair<MetricGraph, double> contract_edge(const MetricGraph& g, int edge) {
    if (g.is_loop(edge))
        throw LoopContractionError("contracting a loop makes the secular function vanish identically");
    const Edge& ed = g.edge(edge);
    if (g.condition(ed.u) != VertexCondition::Neumann || g.condition(ed.v) != VertexCondition::Neumann)
        throw GraphError("contraction requires Neumann conditions at both endpoints");
    const int d1 = g.degree(ed.u), d2 = g.degree(ed.v);
    const double prefactor = 2.0 * (d1 + d2 - 2) / (static_cast<double>(d1) * d2);

    const int keep = ed.u, drop = ed.v;
    std::vector<Vertex> vertices;
    for (int v = 0; v < g.vertex_count(); ++v)
        if (v != drop)
            vertices.push_back(g.vertices()[v]);
    std::vector<Edge> edges;
    for (int e = 0; e < g.edge_count(); ++e) {
        if (e == edge)
            continue;
        Edge ne = g.edge(e);
        ne.u = (ne.u == drop) ? keep : ne.u;
        ne.v = (ne.v == drop) ? keep : ne.v;
        // build() expects vertex ids
        ne.u = g.vertices()[ne.u].id;
        ne.v = g.vertices()[ne.v].id;
        edges.push_back(ne);
    }
    MetricGraph contracted = MetricGraph::build(std::move(vertices), std::move(edges));

    // verify F((0, x_c); a) = prefactor * F_c(x_c; a) at deterministic probes
    CutSet parent_cut = spanning_cut_keeping_in_tree(g, edge);
    CutSet child_cut;
    child_cut.flux_of_edge.assign(contracted.edge_count(), -1);
    for (int j = 0; j < parent_cut.size(); ++j) {
        const int pe = parent_cut.edges[j];
        const int ce = pe - (pe > edge ? 1 : 0);
        child_cut.edges.push_back(ce);
        child_cut.orientation.push_back(parent_cut.orientation[j]);
        child_cut.flux_of_edge[ce] = j;
    }
    SecularContext parent(g, parent_cut);
    SecularContext child(contracted, child_cut);
    Rng rng(0x5eedULL + static_cast<unsigned>(edge));
    const int beta = parent_cut.size();
    for (int probe = 0; probe < 100; ++probe) {
        Eigen::VectorXd xc(contracted.edge_count());
        for (int i = 0; i < xc.size(); ++i)
            xc[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        Eigen::VectorXd av(beta);
        for (int i = 0; i < beta; ++i)
            av[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        Eigen::VectorXd xp(g.edge_count());
        for (int e = 0, c = 0; e < g.edge_count(); ++e)
            xp[e] = (e == edge) ? 0.0 : xc[c++];
        const FluxVector flux{av};
        const Complex lhs = parent.F(TorusPoint(xp), flux);
        const Complex rhs = prefactor * child.F(TorusPoint(xc), flux);
        if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, std::abs(lhs)))
            throw Error("contraction identity violated at a probe point");
    }
    return {std::move(contracted), prefactor};
}

TorusPoint bridge_reflection_map(const SecularContext& ctx, const Splitting& split,
                                 const TorusPoint& x) {
    const MetricGraph& g = ctx.graph();
    validate_splitting(g, split);
    if (split.connectors.size() != 1 || split.connectors[0].edge < 0)
        throw GraphError("bridge reflection needs exactly one real connector edge");
    const auto& conn = split.connectors[0];

    SideFrame side1 = build_side(g, split.part1_edges, {conn.v1});
    Eigen::VectorXcd phases =
        side_phases(ctx, side1, x, FluxVector::zero(ctx.beta()));
    InteriorFactors f1 = lead_factors(side1.frame, phases);
    const Complex z = f1.Z(0, 0);
    if (std::abs(std::abs(z) - 1.0) > 1e-10)
        throw Error("one-lead scattering coefficient is not unimodular");
    double theta = -0.5 * std::arg(z);
    if (theta < 0.0)
        theta += std::numbers::pi;

    Eigen::VectorXd y = x.coords();
    y[conn.edge] = -x[conn.edge] + 2.0 * theta;
    for (int e : split.part2_edges)
        y[e] = -x[e];
    return TorusPoint(std::move(y));
}

} // namespace qg
