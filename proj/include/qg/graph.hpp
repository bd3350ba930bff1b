#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qg/errors.hpp"

namespace qg {

enum class VertexCondition { Neumann, Dirichlet };

struct Vertex {
    int id = 0;
    VertexCondition condition = VertexCondition::Neumann;
};

/// Undirected edge; `u`, `v` are vertex indices after construction
/// (loops have u == v).  Lengths are dimensionless and positive.
struct Edge {
    int id = 0;
    int u = 0;
    int v = 0;
    double length = 0.0;
};

/// A compact connected metric graph with Neumann conditions everywhere and
/// Dirichlet allowed at degree-1 vertices.  Immutable once built; the single
/// source of topology for the rest of the toolkit.
///
/// Vertices and edges are stored sorted by id; all indices used throughout
/// the toolkit refer to positions in these sorted arrays.
class MetricGraph {
public:
    /// Validates and normalizes a description.  Endpoints in `edges` are
    /// vertex *ids* on input and are remapped to indices.
    /// Throws GraphError on: empty edge set, unknown/duplicate ids,
    /// non-positive or non-finite length, disconnected graph, or a
    /// Dirichlet condition at a vertex of degree != 1.
    static MetricGraph build(std::vector<Vertex> vertices, std::vector<Edge> edges);

    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_[e]; }

    /// Number of edge ends meeting the vertex; a loop contributes 2.
    int degree(int v) const { return degree_[v]; }
    bool is_loop(int e) const { return edges_[e].u == edges_[e].v; }
    VertexCondition condition(int v) const { return vertices_[v].condition; }
    bool all_neumann() const;

    /// False iff the graph is a single cycle or polygon (every vertex of
    /// degree 2), where most spectral statements of the toolkit degenerate.
    bool nontrivial() const;

    std::vector<double> lengths() const;
    double total_length() const;

    /// Same topology, new edge lengths (size must match, all positive).
    MetricGraph with_lengths(const std::vector<double>& lengths) const;

private:
    MetricGraph() = default;
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<int> degree_;
};

struct TopologySummary {
    int beta = 0;                  // E - V + 1
    double total_length = 0.0;     // L
    double loop_length = 0.0;      // combined length of loop edges
    double generic_fraction = 0.0; // 1 - L_loops / (2 L), in [1/2, 1]
};

TopologySummary topology_summary(const MetricGraph& g);

/// The set of beta non-tree edges whose removal leaves a spanning tree,
/// together with the orientation that counts as positive flux direction.
struct CutSet {
    std::vector<int> edges;        // edge indices, ascending
    std::vector<int> orientation;  // +1: flux direction equals stored (u,v)
    std::vector<int> flux_of_edge; // edge index -> flux index, -1 for tree edges

    int size() const { return static_cast<int>(edges.size()); }
    int flux_index(int edge_index) const { return flux_of_edge[edge_index]; }
};

/// Deterministic cut set: depth-first traversal from the lowest-id vertex
/// with edges explored in ascending id order; non-tree edges become cut
/// edges oriented away from their earlier-discovered endpoint.
CutSet spanning_cut(const MetricGraph& g);

/// Variant forcing `edge` into the spanning tree (it is explored first at
/// whichever endpoint is reached earlier).  `edge` must not be a loop.
CutSet spanning_cut_keeping_in_tree(const MetricGraph& g, int edge);

enum class SeparationKind { EdgeSeparation, VertexSeparation };

/// One biconnected component carrying at least one independent cycle.
struct GraphBlock {
    std::vector<int> vertices; // vertex indices, ascending
    std::vector<int> edges;    // edge indices, ascending
    int beta = 0;              // local first Betti number
    /// Bridge through which this block attaches toward block 0
    /// (edge separations with >= 2 blocks only; -1 otherwise).
    int attach_bridge = -1;
};

struct BlockDecomposition {
    std::vector<GraphBlock> blocks; // cycle blocks ordered by smallest edge index
    SeparationKind kind = SeparationKind::EdgeSeparation;
    std::vector<int> bridge_edges;  // biconnected components that are single non-loop edges
    std::vector<int> flux_block;    // flux index -> block index
    bool disjoint_cycles = false;   // a vertex-disjoint basis of beta cycles exists
};

/// Maximal decomposition into biconnected blocks.  Cycle blocks pairwise
/// sharing no vertex make an edge separation (every pair is then joined
/// through bridges); blocks meeting at cut vertices make a vertex
/// separation.  The flux partition is consistent with spanning_cut.
BlockDecomposition block_decomposition(const MetricGraph& g);

/// Length expressions for graph files: a decimal literal, optionally times
/// one of the tokens pi, e, sqrt2, sqrt3, sqrt5, optionally divided by a
/// decimal literal.  Examples: "1.5", "pi", "2pi/3", "sqrt2/2", "3/4".
double parse_length(std::string_view text);

/// Line-oriented graph description:
///   vertex <id> [dirichlet]
///   edge <id> <u> <v> <length>
/// '#' starts a comment; blank lines are ignored.
MetricGraph parse_graph(std::istream& in);
MetricGraph parse_graph_file(const std::string& path);

/// Comma-separated list of length expressions ("pi,e,1").
std::vector<double> parse_length_list(std::string_view text);

} // namespace qg
