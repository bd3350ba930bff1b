#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qg/builtins.hpp"
#include "qg/eigenfunction.hpp"
#include "qg/spectrum.hpp"

using namespace qg;

namespace {

constexpr double pi = std::numbers::pi;

/// Dense-sampling oracle: count sign changes of C cos(k t - theta) over
/// 10^4 points per edge, independent of the closed-form counter.
int brute_force_zeros(const MetricGraph& g, double k, const std::vector<EdgeWave>& waves) {
    int total = 0;
    for (int e = 0; e < g.edge_count(); ++e) {
        const double l = g.edge(e).length;
        const int samples = 10000;
        double prev = waves[e].amplitude * std::cos(-waves[e].phase);
        for (int i = 1; i <= samples; ++i) {
            const double t = l * i / samples;
            const double value = waves[e].amplitude * std::cos(k * t - waves[e].phase);
            if ((prev > 0) != (value > 0))
                ++total;
            prev = value;
        }
    }
    return total;
}

} // namespace

TEST_CASE("interval of length 3 pi: the k = 1 eigenfunction has 3 interior zeros") {
    MetricGraph seg = MetricGraph::build({{0, {}}, {1, {}}}, {{0, 0, 1, 3.0 * pi}});
    SecularContext ctx(seg);
    ScanConfig cfg;
    cfg.count = 4;
    auto records = scan_spectrum(ctx, cfg);
    const auto& rec = records[3];  // n=4: k = 3 * (pi / 3pi) = 1
    CHECK(rec.k == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rec.cls == SpectralClass::Generic);

    BondAmplitudes amp = amplitudes(ctx, rec.x);
    auto waves = edge_waves(ctx, rec.x, rec.k, amp);
    NodalData nodal = nodal_count(seg, rec.k, rec.n, waves);
    CHECK(nodal.total == 3);
    CHECK(nodal.surplus == 0);

    // Neumann endpoints carry extrema, not zeros
    auto values = vertex_values(ctx, rec.x, amp);
    CHECK(std::abs(values[0]) > 0.1);
    CHECK(std::abs(values[1]) > 0.1);
}

TEST_CASE("Dirichlet leaf pins the eigenfunction to zero") {
    MetricGraph seg = MetricGraph::build({{0, {}}, {1, VertexCondition::Dirichlet}},
                                         {{0, 0, 1, 1.0}});
    SecularContext ctx(seg);
    ScanConfig cfg;
    cfg.count = 3;
    for (const auto& rec : scan_spectrum(ctx, cfg)) {
        BondAmplitudes amp = amplitudes(ctx, rec.x);
        auto values = vertex_values(ctx, rec.x, amp);
        CHECK(std::abs(values[1]) < 1e-9);
        CHECK(std::abs(values[0]) > 0.1);
    }
}

TEST_CASE("amplitudes reject degenerate points") {
    // circle: all positive eigenvalues are double
    MetricGraph circle = MetricGraph::build({{0, {}}}, {{0, 0, 0, 2.0 * pi}});
    SecularContext ctx(circle);
    CHECK_THROWS_AS(amplitudes(ctx, TorusPoint(std::vector<double>{0.0})), NotSimpleError);
}

TEST_CASE("figure-8 at (pi, pi): amplitudes exist, vertex value vanishes") {
    SecularContext ctx(builtin("figure8"));
    TorusPoint x(std::vector<double>{pi, pi});
    BondAmplitudes amp = amplitudes(ctx, x);
    auto values = vertex_values(ctx, x, amp);
    CHECK(std::abs(values[0]) < 1e-10);
    CHECK(classify_point(ctx, x, 1.0).cls == SpectralClass::VertexVanishing);
}

TEST_CASE("classification flags the ambiguous vertex-value band") {
    // along the generic sheet x = (t, 2pi - t) the vertex value crosses
    // zero at t = pi; an offset of 1e-9 lands the normalized value inside
    // the undecidable band (1e-10, 1e-8)
    SecularContext ctx(builtin("figure8"));
    auto c = classify_point(ctx, TorusPoint(std::vector<double>{pi + 1e-9, pi - 1e-9}), 1.0);
    CHECK(c.flagged);
    CHECK(c.min_vertex_value > 1e-10);
    CHECK(c.min_vertex_value < 1e-8);
    // well outside the band on either side the verdict is unambiguous
    CHECK_FALSE(classify_point(ctx, TorusPoint(std::vector<double>{pi + 1e-7, pi - 1e-7}), 1.0).flagged);
    CHECK_FALSE(classify_point(ctx, TorusPoint(std::vector<double>{pi + 3e-11, pi - 3e-11}), 1.0).flagged);
}

TEST_CASE("null residual, continuity, current conservation on dumbbell records") {
    SecularContext ctx(builtin("dumbbell"));
    ScanConfig cfg;
    cfg.count = 300;
    auto records = scan_spectrum(ctx, cfg);
    int checked = 0;
    for (const auto& rec : records) {
        if (rec.cls != SpectralClass::Generic || rec.flagged)
            continue;
        BondAmplitudes amp = amplitudes(ctx, rec.x);
        // defining property of the amplitude vector
        Eigen::VectorXcd residual = ctx.secular_matrix(rec.x, FluxVector::zero(2)) * amp.a;
        CHECK(residual.norm() < 1e-8);
        CHECK(std::abs(amp.a.norm() - 1.0) < 1e-12);
        // vertex continuity is asserted inside vertex_values
        auto values = vertex_values(ctx, rec.x, amp);
        for (double v : values)
            CHECK(std::abs(v) > 1e-8);
        auto waves = edge_waves(ctx, rec.x, rec.k, amp);
        CHECK(current_conservation_residual(ctx.graph(), rec.k, waves) < 1e-6);
        ++checked;
    }
    CHECK(checked > 150);
}

TEST_CASE("closed-form zero count agrees with dense sampling") {
    // about a thousand generic records across the two graphs
    for (const std::string name : {"dumbbell", "chain321"}) {
        SecularContext ctx(builtin(name));
        ScanConfig cfg;
        cfg.count = 600;
        auto records = scan_spectrum(ctx, cfg);
        int checked = 0;
        for (const auto& rec : records) {
            if (rec.cls != SpectralClass::Generic || rec.flagged)
                continue;
            BondAmplitudes amp = amplitudes(ctx, rec.x);
            auto waves = edge_waves(ctx, rec.x, rec.k, amp);
            NodalData nodal = nodal_count(ctx.graph(), rec.k, rec.n, waves);
            CHECK(nodal.total == brute_force_zeros(ctx.graph(), rec.k, waves));
            ++checked;
        }
        CHECK(checked > 400);
    }
}

TEST_CASE("trees have zero surplus at every generic record") {
    MetricGraph star = MetricGraph::build(
        {{0, {}}, {1, {}}, {2, {}}, {3, {}}},
        {{0, 0, 1, 1.0}, {1, 0, 2, std::numbers::sqrt2}, {2, 0, 3, pi / 2}});
    SecularContext ctx(star);
    ScanConfig cfg;
    cfg.count = 200;
    auto records = scan_spectrum(ctx, cfg);
    int checked = 0;
    for (const auto& rec : records) {
        if (rec.cls != SpectralClass::Generic || rec.flagged)
            continue;
        BondAmplitudes amp = amplitudes(ctx, rec.x);
        auto waves = edge_waves(ctx, rec.x, rec.k, amp);
        NodalData nodal = nodal_count(ctx.graph(), rec.k, rec.n, waves);
        CHECK(nodal.surplus == 0);
        ++checked;
    }
    CHECK(checked > 150);
}

TEST_CASE("figure-8 generic records count phi = n zeros") {
    SecularContext ctx(builtin("figure8"));
    ScanConfig cfg;
    cfg.count = 150;
    auto records = scan_spectrum(ctx, cfg);
    int checked = 0;
    for (const auto& rec : records) {
        if (rec.cls != SpectralClass::Generic || rec.flagged)
            continue;
        BondAmplitudes amp = amplitudes(ctx, rec.x);
        auto waves = edge_waves(ctx, rec.x, rec.k, amp);
        NodalData nodal = nodal_count(ctx.graph(), rec.k, rec.n, waves);
        CHECK(nodal.total == rec.n);  // phi_{2n} = 2n with the record index 2n
        CHECK(nodal.surplus == 1);
        ++checked;
    }
    CHECK(checked > 50);
}

TEST_CASE("surplus bounds hold on every builtin sample") {
    for (const auto& name : builtin_names()) {
        SecularContext ctx(builtin(name));
        const int beta = ctx.beta();
        ScanConfig cfg;
        cfg.count = 150;
        auto records = scan_spectrum(ctx, cfg);
        for (const auto& rec : records) {
            if (rec.cls != SpectralClass::Generic || rec.flagged)
                continue;
            BondAmplitudes amp = amplitudes(ctx, rec.x);
            auto waves = edge_waves(ctx, rec.x, rec.k, amp);
            NodalData nodal = nodal_count(ctx.graph(), rec.k, rec.n, waves);
            CHECK(nodal.surplus >= 0);
            CHECK(nodal.surplus <= beta);
        }
    }
}
