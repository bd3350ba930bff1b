#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qg/builtins.hpp"
#include "qg/rng.hpp"
#include "qg/secular.hpp"

using namespace qg;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("builtin constructors match hand counts") {
    MetricGraph db = builtin("dumbbell");
    CHECK(db.edge_count() == 3);
    CHECK(db.vertex_count() == 2);
    CHECK(topology_summary(db).beta == 2);
    CHECK(db.edge(0).length == doctest::Approx(pi));
    CHECK(db.edge(1).length == doctest::Approx(std::numbers::e));
    CHECK(db.edge(2).length == doctest::Approx(1.0));

    CHECK(topology_summary(builtin("chain321")).beta == 3);
    CHECK(topology_summary(builtin("chain1221")).beta == 2);
    CHECK(builtin("chain:2,1,2").edge_count() == 5);

    CHECK_THROWS_AS(builtin("nonesuch"), GraphError);
    CHECK_THROWS_AS(builtin("dumbbell", std::vector<double>{1.0}), GraphError);
    CHECK_NOTHROW(builtin("figure8", std::vector<double>{1.0, std::numbers::sqrt2}));
}

TEST_CASE("closed forms at pinned points") {
    CHECK(closed_form_FR("figure8", {pi / 2, pi / 2}, {0, 0}) == doctest::Approx(4.0));
    CHECK(closed_form_FR("figure8", {pi, pi}, {0, 0}) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_THROWS_AS(closed_form_FR("chain321", {0, 0, 0, 0, 0, 0}, {0, 0, 0}), GraphError);
    CHECK(has_closed_form("dumbbell"));
    CHECK_FALSE(has_closed_form("chain1221"));
}

TEST_CASE("determinant route matches the closed forms after sign calibration") {
    Rng rng(20260808);
    for (const std::string name : {"figure8", "dumbbell"}) {
        MetricGraph g = builtin(name);
        SecularContext ctx(g);
        const int E = g.edge_count();
        int s = 0;
        int compared = 0;
        for (int i = 0; i < 1000; ++i) {
            std::vector<double> xv(E), av(2);
            for (auto& v : xv)
                v = rng.uniform(0.0, 2.0 * pi);
            for (auto& v : av)
                v = rng.uniform(0.0, 2.0 * pi);
            double oracle = closed_form_FR(name, xv, av);
            double impl = ctx.FR(TorusPoint(xv), FluxVector(Eigen::Map<Eigen::VectorXd>(av.data(), 2)));
            if (s == 0) {
                if (std::abs(oracle) < 1e-3)
                    continue;
                s = (impl / oracle > 0) ? 1 : -1;
            }
            CHECK(std::abs(impl - s * oracle) < 1e-10 * std::max(1.0, std::abs(oracle)));
            ++compared;
        }
        CHECK(compared > 900);
    }
}

TEST_CASE("dumbbell at x2 -> 0 reduces to 8/9 of the figure-8 form") {
    Rng rng(55);
    for (int i = 0; i < 200; ++i) {
        double x1 = rng.uniform(0.0, 2.0 * pi), x3 = rng.uniform(0.0, 2.0 * pi);
        double a1 = rng.uniform(0.0, 2.0 * pi), a2 = rng.uniform(0.0, 2.0 * pi);
        double lhs = closed_form_FR("dumbbell", {x1, 0.0, x3}, {a1, a2});
        double rhs = 8.0 / 9.0 * closed_form_FR("figure8", {x1, x3}, {a1, a2});
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("every builtin passes validation and the secular context builds") {
    for (const auto& name : builtin_names()) {
        MetricGraph g = builtin(name);
        CHECK(g.nontrivial());
        SecularContext ctx(g);
        CHECK(ctx.bond_count() == 2 * g.edge_count());
    }
}
