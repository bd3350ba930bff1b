#include "qg/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace qg {

namespace {

/// Incidence lists: per vertex, (edge index, other endpoint) sorted by edge
/// index.  Loops appear twice.
std::vector<std::vector<std::pair<int, int>>> incidence(const MetricGraph& g) {
    std::vector<std::vector<std::pair<int, int>>> inc(g.vertex_count());
    for (int e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        inc[ed.u].push_back({e, ed.v});
        if (ed.u != ed.v)
            inc[ed.v].push_back({e, ed.u});
        else
            inc[ed.u].push_back({e, ed.u});
    }
    for (auto& list : inc)
        std::sort(list.begin(), list.end());
    return inc;
}

} // namespace

MetricGraph MetricGraph::build(std::vector<Vertex> vertices, std::vector<Edge> edges) {
    if (edges.empty())
        throw GraphError("graph must have at least one edge");
    if (vertices.empty())
        throw GraphError("graph must have at least one vertex");

    std::sort(vertices.begin(), vertices.end(),
              [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return a.id < b.id; });

    std::map<int, int> vidx;
    for (int i = 0; i < static_cast<int>(vertices.size()); ++i) {
        if (!vidx.emplace(vertices[i].id, i).second)
            throw GraphError("duplicate vertex id " + std::to_string(vertices[i].id));
    }
    std::set<int> eids;
    for (auto& e : edges) {
        if (!eids.insert(e.id).second)
            throw GraphError("duplicate edge id " + std::to_string(e.id));
        auto u = vidx.find(e.u);
        auto v = vidx.find(e.v);
        if (u == vidx.end() || v == vidx.end())
            throw GraphError("edge " + std::to_string(e.id) + " references unknown vertex");
        e.u = u->second;
        e.v = v->second;
        if (!(e.length > 0.0) || !std::isfinite(e.length))
            throw GraphError("edge " + std::to_string(e.id) + " must have positive finite length");
    }

    MetricGraph g;
    g.vertices_ = std::move(vertices);
    g.edges_ = std::move(edges);
    g.degree_.assign(g.vertices_.size(), 0);
    for (const auto& e : g.edges_) {
        g.degree_[e.u] += 1;
        g.degree_[e.v] += 1;
    }

    for (int v = 0; v < g.vertex_count(); ++v) {
        if (g.degree_[v] == 0)
            throw GraphError("vertex " + std::to_string(g.vertices_[v].id) + " is isolated");
        if (g.condition(v) == VertexCondition::Dirichlet && g.degree_[v] != 1)
            throw GraphError("Dirichlet condition only allowed at degree-1 vertices (vertex " +
                             std::to_string(g.vertices_[v].id) + ")");
    }

    // connectivity
    std::vector<char> seen(g.vertex_count(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    auto inc = incidence(g);
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (auto [e, w] : inc[u]) {
            (void)e;
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw GraphError("graph is not connected");

    return g;
}

bool MetricGraph::all_neumann() const {
    return std::all_of(vertices_.begin(), vertices_.end(), [](const Vertex& v) {
        return v.condition == VertexCondition::Neumann;
    });
}

bool MetricGraph::nontrivial() const {
    return std::any_of(degree_.begin(), degree_.end(), [](int d) { return d != 2; });
}

std::vector<double> MetricGraph::lengths() const {
    std::vector<double> out(edges_.size());
    for (size_t i = 0; i < edges_.size(); ++i)
        out[i] = edges_[i].length;
    return out;
}

double MetricGraph::total_length() const {
    double L = 0.0;
    for (const auto& e : edges_)
        L += e.length;
    return L;
}

MetricGraph MetricGraph::with_lengths(const std::vector<double>& lengths) const {
    if (lengths.size() != edges_.size())
        throw GraphError("length count mismatch: expected " + std::to_string(edges_.size()) +
                         ", got " + std::to_string(lengths.size()));
    MetricGraph g = *this;
    for (size_t i = 0; i < lengths.size(); ++i) {
        if (!(lengths[i] > 0.0) || !std::isfinite(lengths[i]))
            throw GraphError("lengths must be positive and finite");
        g.edges_[i].length = lengths[i];
    }
    return g;
}

TopologySummary topology_summary(const MetricGraph& g) {
    TopologySummary t;
    t.beta = g.edge_count() - g.vertex_count() + 1;
    t.total_length = g.total_length();
    for (int e = 0; e < g.edge_count(); ++e)
        if (g.is_loop(e))
            t.loop_length += g.edge(e).length;
    t.generic_fraction = 1.0 - t.loop_length / (2.0 * t.total_length);
    return t;
}

namespace {

CutSet cut_from_dfs(const MetricGraph& g, int promoted_edge) {
    auto inc = incidence(g);
    if (promoted_edge >= 0) {
        // move the promoted edge to the front of both endpoint lists
        for (int v : {g.edge(promoted_edge).u, g.edge(promoted_edge).v}) {
            auto& list = inc[v];
            auto it = std::find_if(list.begin(), list.end(),
                                   [&](auto& p) { return p.first == promoted_edge; });
            if (it != list.end())
                std::rotate(list.begin(), it, it + 1);
        }
    }

    const int V = g.vertex_count();
    std::vector<int> disc(V, -1);
    std::vector<char> edge_seen(g.edge_count(), 0);
    std::vector<char> is_tree(g.edge_count(), 0);
    int timer = 0;

    // iterative DFS; per-frame cursor into the incidence list
    std::vector<std::pair<int, size_t>> stack;
    disc[0] = timer++;
    stack.push_back({0, 0});
    while (!stack.empty()) {
        auto& [u, cursor] = stack.back();
        if (cursor == inc[u].size()) {
            stack.pop_back();
            continue;
        }
        auto [e, w] = inc[u][cursor++];
        if (edge_seen[e])
            continue;
        edge_seen[e] = 1;
        if (disc[w] == -1) {
            is_tree[e] = 1;
            disc[w] = timer++;
            stack.push_back({w, 0});
        }
    }

    CutSet cut;
    cut.flux_of_edge.assign(g.edge_count(), -1);
    for (int e = 0; e < g.edge_count(); ++e) {
        if (is_tree[e])
            continue;
        cut.flux_of_edge[e] = static_cast<int>(cut.edges.size());
        cut.edges.push_back(e);
        const Edge& ed = g.edge(e);
        cut.orientation.push_back(disc[ed.u] <= disc[ed.v] ? +1 : -1);
    }
    return cut;
}

} // namespace

CutSet spanning_cut(const MetricGraph& g) {
    return cut_from_dfs(g, -1);
}

CutSet spanning_cut_keeping_in_tree(const MetricGraph& g, int edge) {
    if (g.is_loop(edge))
        throw GraphError("a loop cannot be kept in the spanning tree");
    CutSet cut = cut_from_dfs(g, edge);
    if (cut.flux_of_edge[edge] != -1)
        throw GraphError("internal: promoted edge ended up outside the tree");
    return cut;
}

namespace {

struct BccState {
    const MetricGraph& g;
    std::vector<std::vector<std::pair<int, int>>> inc;
    std::vector<int> disc, low;
    std::vector<char> edge_seen;
    std::vector<int> edge_stack;
    std::vector<std::vector<int>> components; // edge index sets
    int timer = 0;

    explicit BccState(const MetricGraph& graph) : g(graph), inc(incidence(graph)) {
        disc.assign(g.vertex_count(), -1);
        low.assign(g.vertex_count(), -1);
        edge_seen.assign(g.edge_count(), 0);
    }

    void pop_component(int until_edge) {
        std::vector<int> comp;
        while (true) {
            int e = edge_stack.back();
            edge_stack.pop_back();
            comp.push_back(e);
            if (e == until_edge)
                break;
        }
        components.push_back(std::move(comp));
    }

    void dfs(int u) {
        disc[u] = low[u] = timer++;
        for (auto [e, w] : inc[u]) {
            if (edge_seen[e])
                continue;
            edge_seen[e] = 1;
            if (g.is_loop(e)) {
                components.push_back({e});
                continue;
            }
            if (disc[w] == -1) {
                edge_stack.push_back(e);
                dfs(w);
                low[u] = std::min(low[u], low[w]);
                if (low[w] >= disc[u])
                    pop_component(e);
            } else {
                // back edge to an ancestor
                edge_stack.push_back(e);
                low[u] = std::min(low[u], disc[w]);
            }
        }
    }
};

} // namespace

BlockDecomposition block_decomposition(const MetricGraph& g) {
    BccState bcc(g);
    bcc.dfs(0);

    BlockDecomposition dec;
    std::vector<int> edge_block(g.edge_count(), -1);

    struct RawComp {
        std::vector<int> edges, vertices;
        int beta;
    };
    std::vector<RawComp> cycle_comps;

    for (auto& comp : bcc.components) {
        std::sort(comp.begin(), comp.end());
        std::set<int> verts;
        for (int e : comp) {
            verts.insert(g.edge(e).u);
            verts.insert(g.edge(e).v);
        }
        int beta = static_cast<int>(comp.size()) - static_cast<int>(verts.size()) + 1;
        if (beta == 0) {
            dec.bridge_edges.push_back(comp.front());
        } else {
            cycle_comps.push_back({comp, {verts.begin(), verts.end()}, beta});
        }
    }
    std::sort(dec.bridge_edges.begin(), dec.bridge_edges.end());
    std::sort(cycle_comps.begin(), cycle_comps.end(),
              [](const RawComp& a, const RawComp& b) { return a.edges.front() < b.edges.front(); });

    for (auto& c : cycle_comps) {
        GraphBlock b;
        b.vertices = c.vertices;
        b.edges = c.edges;
        b.beta = c.beta;
        for (int e : b.edges)
            edge_block[e] = static_cast<int>(dec.blocks.size());
        dec.blocks.push_back(std::move(b));
    }

    // separation kind: edge separation iff cycle blocks are pairwise
    // vertex-disjoint (they then attach only through bridges)
    std::vector<int> vertex_block_count(g.vertex_count(), 0);
    for (const auto& b : dec.blocks)
        for (int v : b.vertices)
            vertex_block_count[v] += 1;
    bool pairwise_disjoint = std::all_of(vertex_block_count.begin(), vertex_block_count.end(),
                                         [](int c) { return c <= 1; });
    dec.kind = pairwise_disjoint ? SeparationKind::EdgeSeparation : SeparationKind::VertexSeparation;
    bool all_single_cycle = std::all_of(dec.blocks.begin(), dec.blocks.end(),
                                        [](const GraphBlock& b) { return b.beta <= 1; });
    dec.disjoint_cycles = pairwise_disjoint && all_single_cycle;

    // flux partition from the deterministic cut set
    CutSet cut = spanning_cut(g);
    dec.flux_block.assign(cut.size(), -1);
    for (int j = 0; j < cut.size(); ++j) {
        dec.flux_block[j] = edge_block[cut.edges[j]];
        if (dec.flux_block[j] < 0)
            throw GraphError("internal: cut edge outside every cycle block");
    }

    // attach bridges: BFS from block 0, remember the incoming edge per vertex
    if (dec.kind == SeparationKind::EdgeSeparation && dec.blocks.size() >= 2) {
        auto inc = incidence(g);
        std::vector<int> via_edge(g.vertex_count(), -1);
        std::vector<int> dist(g.vertex_count(), -1);
        std::vector<int> queue;
        for (int v : dec.blocks[0].vertices) {
            dist[v] = 0;
            queue.push_back(v);
        }
        for (size_t qi = 0; qi < queue.size(); ++qi) {
            int u = queue[qi];
            for (auto [e, w] : inc[u]) {
                if (dist[w] == -1) {
                    dist[w] = dist[u] + 1;
                    via_edge[w] = e;
                    queue.push_back(w);
                }
            }
        }
        for (size_t j = 1; j < dec.blocks.size(); ++j) {
            int best = -1;
            for (int v : dec.blocks[j].vertices)
                if (best == -1 || dist[v] < dist[best])
                    best = v;
            // walk back until the step taken is a bridge; the bridge nearest
            // to the block is its attachment edge
            int v = best;
            while (v != -1 && via_edge[v] != -1) {
                int e = via_edge[v];
                if (edge_block[e] == -1) {
                    dec.blocks[j].attach_bridge = e;
                    break;
                }
                v = (g.edge(e).u == v) ? g.edge(e).v : g.edge(e).u;
            }
        }
    }

    return dec;
}

// --- graph file format -----------------------------------------------------

double parse_length(std::string_view text) {
    // trim
    size_t b = text.find_first_not_of(" \t");
    size_t e = text.find_last_not_of(" \t");
    if (b == std::string_view::npos)
        throw GraphError("empty length expression");
    text = text.substr(b, e - b + 1);

    auto parse_number = [](std::string_view& s) -> double {
        size_t i = 0;
        while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.'))
            ++i;
        if (i == 0)
            throw GraphError("expected a number");
        double value = std::stod(std::string(s.substr(0, i)));
        s.remove_prefix(i);
        return value;
    };

    double value = 1.0;
    bool have_factor = false;
    if (!text.empty() && (std::isdigit(static_cast<unsigned char>(text[0])) || text[0] == '.')) {
        value = parse_number(text);
        have_factor = true;
    }
    if (!text.empty() && text[0] != '/') {
        static const std::pair<std::string_view, double> symbols[] = {
            {"pi", std::numbers::pi}, {"sqrt2", std::numbers::sqrt2},
            {"sqrt3", std::numbers::sqrt3}, {"sqrt5", std::sqrt(5.0)},
            {"e", std::numbers::e},
        };
        bool matched = false;
        for (auto [name, sym] : symbols) {
            if (text.substr(0, name.size()) == name) {
                value *= sym;
                text.remove_prefix(name.size());
                matched = true;
                have_factor = true;
                break;
            }
        }
        if (!matched)
            throw GraphError("unknown length token: " + std::string(text));
    }
    if (!have_factor)
        throw GraphError("empty length expression");
    if (!text.empty()) {
        if (text[0] != '/')
            throw GraphError("trailing characters in length expression: " + std::string(text));
        text.remove_prefix(1);
        double den = parse_number(text);
        if (!text.empty())
            throw GraphError("trailing characters in length expression: " + std::string(text));
        if (den == 0.0)
            throw GraphError("division by zero in length expression");
        value /= den;
    }
    return value;
}

std::vector<double> parse_length_list(std::string_view text) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos)
            comma = text.size();
        out.push_back(parse_length(text.substr(pos, comma - pos)));
        pos = comma + 1;
        if (comma == text.size())
            break;
    }
    return out;
}

MetricGraph parse_graph(std::istream& in) {
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind))
            continue;
        if (kind == "vertex") {
            Vertex v;
            if (!(ls >> v.id))
                throw GraphError("line " + std::to_string(lineno) + ": vertex needs an id");
            std::string flag;
            if (ls >> flag) {
                if (flag == "dirichlet")
                    v.condition = VertexCondition::Dirichlet;
                else
                    throw GraphError("line " + std::to_string(lineno) + ": unknown vertex flag '" + flag + "'");
            }
            vertices.push_back(v);
        } else if (kind == "edge") {
            Edge e;
            std::string len;
            if (!(ls >> e.id >> e.u >> e.v >> len))
                throw GraphError("line " + std::to_string(lineno) + ": edge needs id, endpoints and length");
            e.length = parse_length(len);
            edges.push_back(e);
        } else {
            throw GraphError("line " + std::to_string(lineno) + ": unknown directive '" + kind + "'");
        }
    }
    return MetricGraph::build(std::move(vertices), std::move(edges));
}

MetricGraph parse_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open graph file: " + path);
    return parse_graph(in);
}

} // namespace qg
