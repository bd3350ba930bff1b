#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "qg/builtins.hpp"
#include "qg/graph.hpp"

using namespace qg;

namespace {

// Independent cycle-rank oracle: fundamental cycles of a BFS tree (a
// different traversal than the DFS used by spanning_cut), reduced by
// Gaussian elimination over GF(2).
int cycle_rank_gf2(const MetricGraph& g) {
    const int V = g.vertex_count(), E = g.edge_count();
    std::vector<int> parent_edge(V, -1), parent(V, -1), order;
    std::vector<char> seen(V, 0), in_tree(E, 0);
    seen[0] = 1;
    order.push_back(0);
    for (size_t qi = 0; qi < order.size(); ++qi) {
        int u = order[qi];
        for (int e = 0; e < E; ++e) {
            if (in_tree[e])
                continue;
            int w = -1;
            if (g.edge(e).u == u)
                w = g.edge(e).v;
            else if (g.edge(e).v == u)
                w = g.edge(e).u;
            else
                continue;
            if (!seen[w]) {
                seen[w] = 1;
                in_tree[e] = 1;
                parent[w] = u;
                parent_edge[w] = e;
                order.push_back(w);
            }
        }
    }
    auto path_to_root = [&](int v, std::vector<char>& vec) {
        while (parent[v] != -1) {
            vec[parent_edge[v]] = vec[parent_edge[v]] ^ 1;
            v = parent[v];
        }
    };
    std::vector<std::vector<char>> rows;
    for (int e = 0; e < E; ++e) {
        if (in_tree[e])
            continue;
        std::vector<char> vec(E, 0);
        vec[e] = 1;
        path_to_root(g.edge(e).u, vec);
        path_to_root(g.edge(e).v, vec);
        rows.push_back(std::move(vec));
    }
    // Gaussian elimination over GF(2)
    int rank = 0;
    for (int col = 0; col < E && rank < static_cast<int>(rows.size()); ++col) {
        int pivot = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); ++r)
            if (rows[r][col]) {
                pivot = r;
                break;
            }
        if (pivot == -1)
            continue;
        std::swap(rows[rank], rows[pivot]);
        for (int r = 0; r < static_cast<int>(rows.size()); ++r)
            if (r != rank && rows[r][col])
                for (int c = 0; c < E; ++c)
                    rows[r][c] ^= rows[rank][c];
        ++rank;
    }
    return rank;
}

} // namespace

TEST_CASE("build: figure-8 from two loops at one vertex") {
    MetricGraph g = MetricGraph::build({{0, VertexCondition::Neumann}},
                                       {{0, 0, 0, std::numbers::pi}, {1, 0, 0, std::numbers::e}});
    CHECK(g.vertex_count() == 1);
    CHECK(g.edge_count() == 2);
    CHECK(g.degree(0) == 4);
    CHECK(g.is_loop(0));
    CHECK(g.is_loop(1));
    CHECK(g.nontrivial());
}

TEST_CASE("build: single edge between Neumann vertices is a valid tree") {
    MetricGraph g = MetricGraph::build({{0, {}}, {1, {}}}, {{0, 0, 1, 1.0}});
    CHECK(topology_summary(g).beta == 0);
    CHECK(g.nontrivial());  // an interval is not a circle
}

TEST_CASE("build: validation errors") {
    CHECK_THROWS_AS(MetricGraph::build({{0, {}}, {1, {}}}, {{0, 0, 1, 0.0}}), GraphError);
    CHECK_THROWS_AS(MetricGraph::build({{0, {}}, {1, {}}}, {{0, 0, 1, -2.0}}), GraphError);
    CHECK_THROWS_AS(MetricGraph::build({{0, {}}}, {}), GraphError);
    // disconnected: two components
    CHECK_THROWS_AS(MetricGraph::build({{0, {}}, {1, {}}, {2, {}}, {3, {}}},
                                       {{0, 0, 1, 1.0}, {1, 2, 3, 1.0}}),
                    GraphError);
    // Dirichlet at degree 2
    CHECK_THROWS_AS(MetricGraph::build({{0, {}}, {1, VertexCondition::Dirichlet}, {2, {}}},
                                       {{0, 0, 1, 1.0}, {1, 1, 2, 1.0}}),
                    GraphError);
    // Dirichlet at a leaf is fine
    CHECK_NOTHROW(MetricGraph::build({{0, {}}, {1, VertexCondition::Dirichlet}}, {{0, 0, 1, 1.0}}));
    // unknown endpoint
    CHECK_THROWS_AS(MetricGraph::build({{0, {}}}, {{0, 0, 7, 1.0}}), GraphError);
}

TEST_CASE("topology: dumbbell beta = 2, chain counts") {
    CHECK(topology_summary(builtin("dumbbell")).beta == 2);
    MetricGraph c321 = builtin("chain321");
    CHECK(c321.edge_count() == 6);
    CHECK(c321.vertex_count() == 4);
    CHECK(topology_summary(c321).beta == 3);
    MetricGraph c1221 = builtin("chain1221");
    CHECK(c1221.edge_count() == 6);
    CHECK(c1221.vertex_count() == 5);
    CHECK(topology_summary(c1221).beta == 2);
}

TEST_CASE("topology: generic fraction") {
    // figure-8: both edges are loops
    auto t8 = topology_summary(builtin("figure8"));
    CHECK(t8.generic_fraction == doctest::Approx(0.5).epsilon(1e-14));
    // loopless graph
    auto tc = topology_summary(builtin("chain321"));
    CHECK(tc.generic_fraction == doctest::Approx(1.0).epsilon(1e-14));
    // dumbbell with lengths (pi, e, 1): 1 - (pi + 1)/(2 (pi + e + 1))
    auto td = topology_summary(builtin("dumbbell"));
    double expected = 1.0 - (std::numbers::pi + 1.0) / (2.0 * (std::numbers::pi + std::numbers::e + 1.0));
    CHECK(td.generic_fraction == doctest::Approx(expected).epsilon(1e-14));
    for (const auto& name : builtin_names()) {
        auto t = topology_summary(builtin(name));
        CHECK(t.generic_fraction >= 0.5);
        CHECK(t.generic_fraction <= 1.0);
    }
}

TEST_CASE("beta agrees with the GF(2) cycle-rank oracle") {
    for (const auto& name : builtin_names())
        CHECK(topology_summary(builtin(name)).beta == cycle_rank_gf2(builtin(name)));
    // a denser ad-hoc graph: theta plus pendant plus loop
    MetricGraph g = MetricGraph::build(
        {{0, {}}, {1, {}}, {2, {}}},
        {{0, 0, 1, 1.0}, {1, 0, 1, 1.3}, {2, 0, 1, 0.7}, {3, 1, 2, 2.0}, {4, 2, 2, 0.9}});
    CHECK(topology_summary(g).beta == cycle_rank_gf2(g));
    CHECK(topology_summary(g).beta == 3);
}

TEST_CASE("spanning cut: loops always cut, trees empty, deterministic") {
    MetricGraph f8 = builtin("figure8");
    CutSet c8 = spanning_cut(f8);
    CHECK(c8.edges == std::vector<int>{0, 1});

    MetricGraph tree = MetricGraph::build({{0, {}}, {1, {}}, {2, {}}},
                                          {{0, 0, 1, 1.0}, {1, 1, 2, 2.0}});
    CHECK(spanning_cut(tree).edges.empty());

    MetricGraph db = builtin("dumbbell");
    CutSet cd = spanning_cut(db);
    CHECK(cd.edges == std::vector<int>{0, 2});  // the two loops; bridge in the tree
    CHECK(cd.flux_index(1) == -1);

    CutSet again = spanning_cut(db);
    CHECK(again.edges == cd.edges);
    CHECK(again.orientation == cd.orientation);
}

TEST_CASE("spanning cut keeping an edge in the tree") {
    MetricGraph c321 = builtin("chain321");
    for (int e = 0; e < c321.edge_count(); ++e) {
        CutSet c = spanning_cut_keeping_in_tree(c321, e);
        CHECK(c.size() == 3);
        CHECK(c.flux_index(e) == -1);
    }
    CHECK_THROWS_AS(spanning_cut_keeping_in_tree(builtin("figure8"), 0), GraphError);
}

TEST_CASE("blocks: dumbbell is two edge-separated single-cycle blocks") {
    auto dec = block_decomposition(builtin("dumbbell"));
    REQUIRE(dec.blocks.size() == 2);
    CHECK(dec.blocks[0].beta == 1);
    CHECK(dec.blocks[1].beta == 1);
    CHECK(dec.kind == SeparationKind::EdgeSeparation);
    CHECK(dec.disjoint_cycles);
    CHECK(dec.bridge_edges == std::vector<int>{1});
    CHECK(dec.blocks[1].attach_bridge == 1);
    // flux partition: flux 0 on edge 0 (block 0), flux 1 on edge 2 (block 1)
    CHECK(dec.flux_block == std::vector<int>{0, 1});
}

TEST_CASE("blocks: [3,2,1] chain has vertex-separated blocks (2, 1)") {
    auto dec = block_decomposition(builtin("chain321"));
    REQUIRE(dec.blocks.size() == 2);
    CHECK(dec.blocks[0].beta == 2);
    CHECK(dec.blocks[1].beta == 1);
    CHECK(dec.kind == SeparationKind::VertexSeparation);
    CHECK_FALSE(dec.disjoint_cycles);
    CHECK(dec.flux_block == std::vector<int>{0, 0, 1});
}

TEST_CASE("blocks: [1,2,2,1] chain cycles share a vertex") {
    auto dec = block_decomposition(builtin("chain1221"));
    REQUIRE(dec.blocks.size() == 2);
    CHECK(dec.blocks[0].beta == 1);
    CHECK(dec.blocks[1].beta == 1);
    CHECK(dec.kind == SeparationKind::VertexSeparation);
    CHECK_FALSE(dec.disjoint_cycles);  // not separable through bridges
}

TEST_CASE("blocks: figure-8 loops meet at the vertex") {
    auto dec = block_decomposition(builtin("figure8"));
    REQUIRE(dec.blocks.size() == 2);
    CHECK(dec.kind == SeparationKind::VertexSeparation);
    CHECK_FALSE(dec.disjoint_cycles);
}

TEST_CASE("blocks: local betas sum to beta on every builtin") {
    for (const auto& name : builtin_names()) {
        MetricGraph g = builtin(name);
        auto dec = block_decomposition(g);
        int sum = 0;
        for (const auto& b : dec.blocks)
            sum += b.beta;
        CHECK(sum == topology_summary(g).beta);
        for (int fb : dec.flux_block)
            CHECK(fb >= 0);
    }
}

TEST_CASE("length expressions") {
    CHECK(parse_length("pi") == doctest::Approx(std::numbers::pi).epsilon(1e-15));
    CHECK(parse_length("2pi/3") == doctest::Approx(2.0 * std::numbers::pi / 3.0).epsilon(1e-15));
    CHECK(parse_length("e") == doctest::Approx(std::numbers::e).epsilon(1e-15));
    CHECK(parse_length("2e") == doctest::Approx(2.0 * std::numbers::e).epsilon(1e-15));
    CHECK(parse_length("sqrt2") == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(parse_length("sqrt2/2") == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
    CHECK(parse_length("sqrt5") == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    CHECK(parse_length("1.5") == 1.5);
    CHECK(parse_length("3/4") == 0.75);
    CHECK(parse_length(" 1 ") == 1.0);
    CHECK_THROWS_AS(parse_length(""), GraphError);
    CHECK_THROWS_AS(parse_length("foo"), GraphError);
    CHECK_THROWS_AS(parse_length("1x"), GraphError);
    CHECK_THROWS_AS(parse_length("pi/0"), GraphError);
    auto list = parse_length_list("pi,e,1");
    REQUIRE(list.size() == 3);
    CHECK(list[2] == 1.0);
}

TEST_CASE("graph file parsing") {
    std::istringstream in(
        "# a dumbbell with a dirichlet tail\n"
        "vertex 0\n"
        "vertex 1\n"
        "vertex 5 dirichlet\n"
        "edge 0 0 0 pi   # loop\n"
        "edge 1 0 1 e\n"
        "edge 2 1 1 1\n"
        "edge 3 1 5 sqrt2\n");
    MetricGraph g = parse_graph(in);
    CHECK(g.vertex_count() == 3);
    CHECK(g.edge_count() == 4);
    CHECK(g.condition(2) == VertexCondition::Dirichlet);
    CHECK(topology_summary(g).beta == 2);

    std::istringstream bad("vertex 0\nedge 0 0 0\n");
    CHECK_THROWS_AS(parse_graph(bad), GraphError);
    std::istringstream bad2("thing 1 2\n");
    CHECK_THROWS_AS(parse_graph(bad2), GraphError);
}

TEST_CASE("nontrivial flag: circles and polygons are trivial") {
    // single loop = circle
    MetricGraph circle = MetricGraph::build({{0, {}}}, {{0, 0, 0, 1.0}});
    CHECK_FALSE(circle.nontrivial());
    // triangle = polygon
    MetricGraph tri = MetricGraph::build({{0, {}}, {1, {}}, {2, {}}},
                                         {{0, 0, 1, 1.0}, {1, 1, 2, 1.1}, {2, 2, 0, 1.2}});
    CHECK_FALSE(tri.nontrivial());
    CHECK(builtin("dumbbell").nontrivial());
}
