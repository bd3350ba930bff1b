#pragma once

#include <utility>
#include <vector>

#include "qg/secular.hpp"

namespace qg {

/// A graph probed through leads attached at designated vertices (a
/// multiset; a vertex may carry several leads).  Exposes the blocks
/// [r t'; t S~] of the lead-extended bond matrix and the unitary lead
/// scattering matrix Z.
class ScatteringConfig {
public:
    ScatteringConfig(MetricGraph g, std::vector<int> lead_vertices);

    const MetricGraph& graph() const { return graph_; }
    const CutSet& cut() const { return cut_; }
    int leads() const { return frame_.leads; }

    const Eigen::MatrixXd& extended_matrix() const { return frame_.S; }
    Eigen::MatrixXd r() const;
    Eigen::MatrixXd t() const;
    Eigen::MatrixXd t_prime() const;
    Eigen::MatrixXd s_tilde() const;

    /// Z(x, a) = r + t' (Id - e^{ix+ia} S~)^{-1} e^{ix+ia} t.
    /// Throws InWSetError when Id - e^{ix+ia} S~ is singular (an
    /// eigenfunction vanishes at every lead attachment vertex).
    Eigen::MatrixXcd Z(const TorusPoint& x, const FluxVector& a) const;

    /// det(Id - e^{ix+ia} S~): the D factor of the splitting identity.
    Complex interior_determinant(const TorusPoint& x, const FluxVector& a) const;

    double smallest_interior_singular(const TorusPoint& x, const FluxVector& a) const;

private:
    Eigen::VectorXcd bond_phases(const TorusPoint& x, const FluxVector& a) const;

    MetricGraph graph_;
    CutSet cut_;
    BondFrame frame_;
    std::vector<double> flux_sign_;
};

/// Phase of the one-lead scattering coefficient Z1 = e^{2 i theta}, mapped
/// to [0, pi).  Determined by the torus coordinates of the probed subgraph
/// alone.  Throws InWSetError on W-set points.
double theta0(const ScatteringConfig& cfg, const TorusPoint& x);

/// A splitting [Gamma1, connectors, Gamma2].  Every edge of the graph is
/// either in part1, in part2, or a connector.  Zero-length connectors
/// (edge == -1) split a cut vertex in two; gluing them back (and
/// contracting) recovers the graph.
struct Splitting {
    struct Connector {
        int edge = -1;  // real edge index, or -1 for a zero-length connector
        int v1 = -1;    // attachment on the part-1 side
        int v2 = -1;    // attachment on the part-2 side (== v1 when zero length)
    };
    std::vector<int> part1_edges;
    std::vector<int> part2_edges;
    std::vector<Connector> connectors;
};

/// Split at a bridge: part 1 is the component holding the bridge's stored
/// u endpoint, the bridge becomes the single (real) connector.
Splitting split_at_bridge(const MetricGraph& g, int bridge_edge);

/// Split at a cut vertex with a single zero-length connector: part 1 is
/// the edge flap at the vertex containing the lowest edge index, part 2
/// the rest.
Splitting split_at_cut_vertex(const MetricGraph& g, int vertex);

struct SplittingFactors {
    Complex F = 0.0;      // secular function of the split graph
    Complex D1 = 0.0;     // det(Id - e^{ix1+ia1} S1)
    Complex D2 = 0.0;     // det(Id - e^{ix2+ia2} S2)
    Complex inner = 0.0;  // det(Id - e^{ix0+ia0} Z1 e^{ix0-ia0} Z2)
    Eigen::MatrixXcd Z1, Z2;
    Eigen::VectorXcd connector_phase;  // e^{i x0} per connector
    double c = 1.0;       // product of contraction prefactors (zero-length connectors)
    double residual = 0.0;  // |c F - D1 D2 inner|
};

/// Evaluate every factor of the splitting identity c F = D1 D2 inner and
/// its residual.  The prefactor c is 1 for real connectors and the product
/// of 2(d1+d2-2)/(d1 d2) over zero-length connectors.
SplittingFactors splitting_factorization(const SecularContext& ctx, const Splitting& split,
                                         const TorusPoint& x, const FluxVector& a);

/// Contract a non-loop edge with Neumann endpoints; returns the contracted
/// graph and the prefactor 2(d1+d2-2)/(d1 d2) relating the two secular
/// functions at x_e = 0.  The identity is verified at 100 deterministic
/// probe points on construction.  Throws LoopContractionError on loops.
std::pair<MetricGraph, double> contract_edge(const MetricGraph& g, int edge);

/// R(x1, x0, x2) = (x1, -x0 + 2 theta0(x1), -x2) for a splitting whose
/// single real connector is a bridge.  Pure transformation; the spectral
/// post-conditions are checked by the nodal layer.
TorusPoint bridge_reflection_map(const SecularContext& ctx, const Splitting& split,
                                 const TorusPoint& x);

} // namespace qg
