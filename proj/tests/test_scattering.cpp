#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qg/builtins.hpp"
#include "qg/nodal.hpp"
#include "qg/rng.hpp"
#include "qg/scattering.hpp"
#include "qg/spectrum.hpp"

using namespace qg;

namespace {

constexpr double pi = std::numbers::pi;

TorusPoint random_point(int dim, Rng& rng) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i)
        x[i] = rng.uniform(0.0, 2.0 * pi);
    return TorusPoint(std::move(x));
}

FluxVector random_flux(int dim, Rng& rng) {
    Eigen::VectorXd a(dim);
    for (int i = 0; i < dim; ++i)
        a[i] = rng.uniform(0.0, 2.0 * pi);
    return FluxVector(std::move(a));
}

} // namespace

TEST_CASE("extended matrix: orthogonality and block symmetries") {
    for (const auto& name : builtin_names()) {
        MetricGraph g = builtin(name);
        std::vector<int> leads{0};
        if (g.vertex_count() > 1)
            leads.push_back(1);
        ScatteringConfig cfg(g, leads);
        const Eigen::MatrixXd& s = cfg.extended_matrix();
        const int n = static_cast<int>(s.rows());
        CHECK((s * s.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((cfg.r() - cfg.r().transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::MatrixXd jt = cfg.t();
        for (int e = 0; e < g.edge_count(); ++e)
            jt.row(2 * e).swap(jt.row(2 * e + 1));
        CHECK((cfg.t_prime() - jt.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("Z is unitary with the conjugation and transposition symmetries") {
    Rng rng(101);
    for (const std::string name : {"figure8", "dumbbell", "chain321"}) {
        MetricGraph g = builtin(name);
        std::vector<int> leads{0};
        if (g.vertex_count() > 1)
            leads.push_back(g.vertex_count() - 1);
        ScatteringConfig cfg(g, leads);
        const int m = cfg.leads();
        int used = 0;
        for (int i = 0; i < 200; ++i) {
            TorusPoint x = random_point(g.edge_count(), rng);
            FluxVector a = random_flux(cfg.cut().size(), rng);
            try {
                Eigen::MatrixXcd z = cfg.Z(x, a);
                CHECK((z * z.adjoint() - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff() <
                      1e-10);
                CHECK((cfg.Z(x.inverted(), a.negated()) - z.conjugate()).cwiseAbs().maxCoeff() <
                      1e-10);
                CHECK((cfg.Z(x, a.negated()) - z.transpose()).cwiseAbs().maxCoeff() < 1e-10);
                ++used;
            } catch (const InWSetError&) {
            }
        }
        CHECK(used > 150);
    }
}

TEST_CASE("W set: loop state vanishing at the lead vertex") {
    // figure-8 with a lead at its only vertex; on x1 = 0 the loop-supported
    // eigenfunction vanishes there
    ScatteringConfig cfg(builtin("figure8"), {0});
    TorusPoint x(std::vector<double>{0.0, 1.234});
    FluxVector a = FluxVector::zero(2);
    CHECK(cfg.smallest_interior_singular(x, a) < 1e-10);
    CHECK_THROWS_AS(cfg.Z(x, a), InWSetError);
}

TEST_CASE("theta0: unimodular coefficient, range, determinism") {
    MetricGraph g = builtin("dumbbell");
    // probe the left loop through a lead at its vertex
    MetricGraph loop = MetricGraph::build({{0, {}}}, {{0, 0, 0, pi}});
    ScatteringConfig cfg(loop, {0});
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        TorusPoint x1 = random_point(1, rng);
        try {
            const double theta = theta0(cfg, x1);
            CHECK(theta >= 0.0);
            CHECK(theta < pi);
            // the wave phase on the probed side determines Z = e^{-2i theta}
            const Complex z = cfg.Z(x1, FluxVector::zero(1))(0, 0);
            CHECK(std::abs(std::polar(1.0, -2.0 * theta) - z) < 1e-10);
            CHECK(theta0(cfg, x1) == theta);
        } catch (const InWSetError&) {
        }
    }
}

TEST_CASE("splitting the dumbbell at its bridge") {
    MetricGraph g = builtin("dumbbell");
    SecularContext ctx(g);
    const Splitting split = split_at_bridge(g, 1);
    CHECK(split.part1_edges == std::vector<int>{0});
    CHECK(split.part2_edges == std::vector<int>{2});
    Rng rng(77);
    int used = 0;
    for (int i = 0; i < 300; ++i) {
        TorusPoint x = random_point(3, rng);
        FluxVector a = random_flux(2, rng);
        try {
            const SplittingFactors f = splitting_factorization(ctx, split, x, a);
            CHECK(f.c == 1.0);
            CHECK(f.residual < 1e-9 * std::max(1.0, std::abs(f.F)));
            ++used;
        } catch (const InWSetError&) {
        }
    }
    CHECK(used > 250);
}

TEST_CASE("on the generic manifold the folded 1x1 factors conjugate") {
    MetricGraph g = builtin("dumbbell");
    SecularContext ctx(g);
    const Splitting split = split_at_bridge(g, 1);
    ScanConfig cfg;
    cfg.count = 150;
    int checked = 0;
    for (const auto& rec : scan_spectrum(ctx, cfg)) {
        if (rec.cls != SpectralClass::Generic || rec.flagged)
            continue;
        const SplittingFactors f =
            splitting_factorization(ctx, split, rec.x, FluxVector::zero(2));
        const Complex z1 = f.connector_phase[0] * f.Z1(0, 0);
        const Complex z2 = f.connector_phase[0] * f.Z2(0, 0);
        CHECK(std::abs(z2 - std::conj(z1)) < 1e-9);
        ++checked;
    }
    CHECK(checked > 60);
}

TEST_CASE("splitting chains at the cut vertex with a zero-length connector") {
    // [3,2,1] chain: flap degrees 3+1 and 2+1 give c = 2(4+3-2)/12 = 5/6
    MetricGraph g = builtin("chain321");
    SecularContext ctx(g);
    const Splitting split = split_at_cut_vertex(g, 1);
    CHECK(split.part1_edges == std::vector<int>{0, 1, 2});
    Rng rng(31);
    int used = 0;
    for (int i = 0; i < 300; ++i) {
        TorusPoint x = random_point(6, rng);
        FluxVector a = random_flux(3, rng);
        try {
            const SplittingFactors f = splitting_factorization(ctx, split, x, a);
            CHECK(f.c == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
            CHECK(f.residual < 1e-9 * std::max(1.0, std::abs(f.F)));
            ++used;
        } catch (const InWSetError&) {
        }
    }
    CHECK(used > 250);
}

TEST_CASE("splitting the figure-8 at its vertex") {
    // both flaps have degree 2+1 = 3: c = 2(3+3-2)/9 = 8/9
    MetricGraph g = builtin("figure8");
    SecularContext ctx(g);
    const Splitting split = split_at_cut_vertex(g, 0);
    Rng rng(32);
    int used = 0;
    for (int i = 0; i < 300; ++i) {
        TorusPoint x = random_point(2, rng);
        FluxVector a = random_flux(2, rng);
        try {
            const SplittingFactors f = splitting_factorization(ctx, split, x, a);
            CHECK(f.c == doctest::Approx(8.0 / 9.0).epsilon(1e-14));
            CHECK(f.residual < 1e-9 * std::max(1.0, std::abs(f.F)));
            ++used;
        } catch (const InWSetError&) {
        }
    }
    CHECK(used > 250);
}

TEST_CASE("contracting the dumbbell bridge yields the figure-8 with factor 8/9") {
    MetricGraph g = builtin("dumbbell");
    auto [contracted, prefactor] = contract_edge(g, 1);
    CHECK(prefactor == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
    CHECK(contracted.vertex_count() == 1);
    CHECK(contracted.edge_count() == 2);
    CHECK(contracted.is_loop(0));
    CHECK(contracted.is_loop(1));
}

TEST_CASE("contraction prefactor for endpoint degrees 3 and 5") {
    // u: loop + bridge (degree 3); w: two loops + bridge (degree 5)
    MetricGraph g = MetricGraph::build(
        {{0, {}}, {1, {}}},
        {{0, 0, 1, 1.0}, {1, 0, 0, pi}, {2, 1, 1, std::numbers::e}, {3, 1, 1, std::numbers::sqrt2}});
    auto [contracted, prefactor] = contract_edge(g, 0);
    CHECK(prefactor == doctest::Approx(4.0 / 5.0).epsilon(1e-15));
    CHECK(contracted.edge_count() == 3);
}

TEST_CASE("contraction identity holds on every non-loop builtin edge") {
    for (const auto& name : builtin_names()) {
        MetricGraph g = builtin(name);
        for (int e = 0; e < g.edge_count(); ++e) {
            if (g.is_loop(e))
                continue;
            CHECK_NOTHROW(contract_edge(g, e));  // probes 100 points internally
        }
    }
}

TEST_CASE("loops cannot be contracted") {
    CHECK_THROWS_AS(contract_edge(builtin("figure8"), 0), LoopContractionError);
}

TEST_CASE("bridge reflection lands on the secular manifold") {
    MetricGraph g = builtin("dumbbell");
    SecularContext ctx(g);
    const Splitting split = split_at_bridge(g, 1);
    ScanConfig cfg;
    cfg.count = 120;
    int checked = 0;
    for (const auto& rec : scan_spectrum(ctx, cfg)) {
        if (rec.cls != SpectralClass::Generic || rec.flagged)
            continue;
        TorusPoint image = bridge_reflection_map(ctx, split, rec.x);
        CHECK(std::abs(ctx.FR0(image)) < 1e-8);
        ++checked;
    }
    CHECK(checked > 60);
}
