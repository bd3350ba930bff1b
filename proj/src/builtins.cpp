#include "qg/builtins.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qg {

namespace {

std::vector<double> default_lengths(size_t count) {
    static const double base[] = {std::numbers::pi, std::numbers::e, 1.0,
                                  std::numbers::sqrt2, std::numbers::sqrt3, std::sqrt(5.0)};
    std::vector<double> out;
    out.reserve(count);
    for (size_t i = 0; i < count && i < 6; ++i)
        out.push_back(base[i]);
    // extend with sqrt of successive primes for longer chains
    int candidate = 7;
    auto is_prime = [](int n) {
        for (int d = 2; d * d <= n; ++d)
            if (n % d == 0)
                return false;
        return n >= 2;
    };
    while (out.size() < count) {
        while (!is_prime(candidate))
            ++candidate;
        out.push_back(std::sqrt(static_cast<double>(candidate)));
        ++candidate;
    }
    return out;
}

std::vector<double> pick_lengths(size_t count, const std::optional<std::vector<double>>& lengths) {
    if (!lengths)
        return default_lengths(count);
    if (lengths->size() != count)
        throw GraphError("length count mismatch: expected " + std::to_string(count) +
                         ", got " + std::to_string(lengths->size()));
    return *lengths;
}

} // namespace

MetricGraph pumpkin_chain(const std::vector<int>& pumpkins,
                          const std::optional<std::vector<double>>& lengths) {
    if (pumpkins.empty())
        throw GraphError("pumpkin chain needs at least one pumpkin");
    size_t total = 0;
    for (int p : pumpkins) {
        if (p < 1)
            throw GraphError("pumpkin multiplicities must be positive");
        total += static_cast<size_t>(p);
    }
    auto len = pick_lengths(total, lengths);

    std::vector<Vertex> vertices;
    for (int v = 0; v <= static_cast<int>(pumpkins.size()); ++v)
        vertices.push_back({v, VertexCondition::Neumann});
    std::vector<Edge> edges;
    int id = 0;
    for (size_t k = 0; k < pumpkins.size(); ++k)
        for (int j = 0; j < pumpkins[k]; ++j, ++id)
            edges.push_back({id, static_cast<int>(k), static_cast<int>(k) + 1, len[id]});
    return MetricGraph::build(std::move(vertices), std::move(edges));
}

MetricGraph builtin(const std::string& name, const std::optional<std::vector<double>>& lengths) {
    if (name == "figure8") {
        auto len = pick_lengths(2, lengths);
        return MetricGraph::build({{0, VertexCondition::Neumann}},
                                  {{0, 0, 0, len[0]}, {1, 0, 0, len[1]}});
    }
    if (name == "dumbbell") {
        auto len = pick_lengths(3, lengths);
        return MetricGraph::build({{0, VertexCondition::Neumann}, {1, VertexCondition::Neumann}},
                                  {{0, 0, 0, len[0]}, {1, 0, 1, len[1]}, {2, 1, 1, len[2]}});
    }
    if (name == "chain1221")
        return pumpkin_chain({1, 2, 2, 1}, lengths);
    if (name == "chain321")
        return pumpkin_chain({3, 2, 1}, lengths);
    if (name.rfind("chain:", 0) == 0) {
        std::vector<int> pumpkins;
        std::istringstream ss(name.substr(6));
        std::string tok;
        while (std::getline(ss, tok, ','))
            pumpkins.push_back(std::stoi(tok));
        return pumpkin_chain(pumpkins, lengths);
    }
    throw GraphError("unknown builtin graph: " + name);
}

bool has_closed_form(const std::string& name) {
    return name == "figure8" || name == "dumbbell";
}

double closed_form_FR(const std::string& name,
                      const std::vector<double>& x,
                      const std::vector<double>& alpha) {
    if (name == "figure8") {
        if (x.size() != 2 || alpha.size() != 2)
            throw GraphError("figure8 closed form expects 2 torus and 2 flux coordinates");
        return 2.0 * (std::cos(alpha[1]) * std::sin(x[0]) + std::cos(alpha[0]) * std::sin(x[1]) -
                      std::sin(x[0] + x[1]));
    }
    if (name == "dumbbell") {
        if (x.size() != 3 || alpha.size() != 2)
            throw GraphError("dumbbell closed form expects 3 torus and 2 flux coordinates");
        const double x1 = x[0], x2 = x[1], x3 = x[2];
        const double a1 = alpha[0], a2 = alpha[1];
        return 16.0 / 9.0 * std::cos(x2) *
                   (std::cos(a1) * std::sin(x3) + std::cos(a2) * std::sin(x1) - std::sin(x1 + x3)) -
               8.0 / 9.0 * std::sin(x2) *
                   (4.0 * (std::cos(a1) - std::cos(x1)) * (std::cos(a2) - std::cos(x3)) -
                    std::sin(x1) * std::sin(x3));
    }
    throw GraphError("no closed-form secular function for: " + name);
}

std::vector<std::string> builtin_names() {
    return {"figure8", "dumbbell", "chain1221", "chain321"};
}

} // namespace qg
