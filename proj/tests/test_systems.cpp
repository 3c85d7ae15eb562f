#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "liouville/catalog.hpp"
#include "liouville/systems.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace liouville;
using testutil::Rng;

TEST_CASE("verify: canonical model passes every check") {
    auto entry = canModel(3);
    auto rep = verify(entry.system, entry.expected);
    CHECK(rep.pass());
    CHECK(rep.jacobi <= 1e-12);
    CHECK(rep.involutivityMax <= 1e-9);
    CHECK(rep.independenceOffZ >= 0.99);
    CHECK_FALSE(rep.hasZ);
}

TEST_CASE("verify: twisted model passes including transversality and on-Z independence") {
    auto entry = twModel(2, 2.5);
    auto rep = verify(entry.system, entry.expected);
    CHECK(rep.pass());
    CHECK(rep.hasZ);
    CHECK(rep.independenceOnZ >= 0.99);
    CHECK(rep.transversality.pass);
    REQUIRE(rep.modularWeights.size() == 2);
    CHECK(rep.modularWeights[0] == 2.5);
    CHECK(rep.modularWeights[1] == 0.0);
}

TEST_CASE("verify: planted involutivity failure is caught") {
    auto sys = canModel(2).system;
    auto coords = sys.chart().coordNames();
    // theta1 does not commute with a1: {a1, theta1} = 1
    sys.integrals[1] = promote(parse("theta1", coords), coords);
    auto rep = verify(sys);
    CHECK_FALSE(rep.pass());
    CHECK_FALSE(rep.involutivityPass);
    CHECK(rep.involutivityMax == doctest::Approx(1.0));
    CHECK(rep.worstPair == std::pair<int, int>{0, 1});
    CHECK(rep.worstPoint.size() == 4);
}

TEST_CASE("verify: dependent integrals fail independence") {
    auto sys = canModel(2).system;
    sys.integrals[1] = sys.integrals[0];
    sys.integralNames[1] = sys.integralNames[0];
    auto rep = verify(sys);
    CHECK_FALSE(rep.pass());
    CHECK_FALSE(rep.independencePass);
    CHECK(rep.independenceOffZ == 0.0);
}

TEST_CASE("verify: non-Jacobi custom bivector fails the Jacobi check") {
    PhaseChart chart = PhaseChart::make({{"x1", false}, {"x2", false}}, {"x3", "x4"});
    std::vector<std::vector<Expr>> upper(4, std::vector<Expr>(4));
    upper[0][1] = Expr::coord(2);
    upper[2][3] = Expr::number(1.0);
    IntegrableSystem sys;
    sys.name = "planted";
    sys.structure = PoissonStructure::custom(chart, upper);
    auto coords = chart.coordNames();
    sys.integralNames = {"f1", "f2"};
    sys.integrals = {promote(parse("x4", coords), coords), promote(parse("x3", coords), coords)};
    auto rep = verify(sys);
    CHECK_FALSE(rep.jacobiPass);
    CHECK(rep.jacobi == doctest::Approx(1.0));
}

TEST_CASE("oscillator model: independent off its singular set, dependent on it") {
    auto entry = oscillatorB();
    auto rep = verify(entry.system, entry.expected);
    CHECK(rep.pass());

    // rank drops exactly where the catalog predicate says it does
    // resonance circle x1=y2, x2=-y1 (theta, x1, x2 | a, y1, y2)
    std::vector<double> onSing = {0.3, 0.6, -0.8, 1.2, 0.8, 0.6};
    REQUIRE(entry.singularSet(onSing));
    CHECK_FALSE(regularPoint(entry.system, onSing));
    CHECK(independenceSigmaMin(entry.system, onSing) < 1e-6);

    std::vector<double> offSing = {0.3, 0.6, -0.8, 1.2, 0.1, 0.9};
    REQUIRE_FALSE(entry.singularSet(offSing));
    CHECK(regularPoint(entry.system, offSing));
    CHECK(independenceSigmaMin(entry.system, offSing) > 1e-3);

    // fixed point of the oscillator in the base factor
    std::vector<double> origin = {0.3, 0.0, 0.0, 1.2, 0.0, 0.0};
    CHECK(entry.singularSet(origin));
    CHECK_FALSE(regularPoint(entry.system, origin));
}

TEST_CASE("regularPoint: hyperbolic model degenerates at x=y=0") {
    auto entry = hyperbolic(1.0);
    CHECK_FALSE(regularPoint(entry.system, {0.3, 0.0, 1.1, 0.0}));
    CHECK(regularPoint(entry.system, {0.3, 0.7, 1.1, -0.4}));
}

TEST_CASE("modular weights: scaling an integral scales its weight") {
    auto sys = twModel(2, 2.5).system;
    auto w = modularWeights(sys);
    REQUIRE(w.size() == 2);
    CHECK(w[0] == 2.5);
    CHECK(w[1] == 0.0);

    sys.integrals[0] = linearCombination(2.0, sys.integrals[0], 1.0, sys.integrals[1]);
    auto w2 = modularWeights(sys);
    CHECK(w2[0] == 5.0);

    CHECK_THROWS_AS(modularWeights(canModel(2).system), ChartError);
}

TEST_CASE("verify is deterministic for a fixed seed and sensitive to it") {
    auto entry = twModel(2, 1.5);
    VerifyOptions opt = entry.expected;
    opt.seed = 42;
    auto a = verify(entry.system, opt);
    auto b = verify(entry.system, opt);
    CHECK(a.involutivityMax == b.involutivityMax);
    CHECK(a.independenceOffZ == b.independenceOffZ);
    CHECK(a.jacobi == b.jacobi);
    // seed sensitivity shows up in the sample stream itself
    PointSampler s42(entry.system.chart(), 42);
    PointSampler s43(entry.system.chart(), 43);
    CHECK(s42.sample() != s43.sample());
}

TEST_CASE("point sampler respects Z constraints and angle periods") {
    auto chart = twModel(2, 1.0).system.chart();
    PointSampler sampler(chart, 42, 2.0);
    for (int i = 0; i < 200; ++i) {
        auto p = sampler.sample();
        CHECK(p.size() == 4);
        CHECK(p[0] >= 0.0);
        CHECK(p[0] < 1.0);
        CHECK(std::fabs(p[2]) <= 2.0);
        auto z = sampler.sampleOnZ(2);
        CHECK(z[2] == 0.0);
        auto off = sampler.sampleOffZ(2, 0.1);
        CHECK(std::fabs(off[2]) >= 0.1);
    }
}

TEST_CASE("product with a transverse factor: transverse coordinates are Casimirs") {
    auto entry = poissonProduct(2, 4);
    auto sys = entry.system;
    CHECK(sys.dim() == 6);  // 2 base + 2 fiber + 2 transverse
    auto rep = verify(sys, entry.expected);
    CHECK(rep.pass());
    // transverse coordinates commute with everything
    Rng rng(21);
    auto coords = sys.chart().coordNames();
    for (int s = 0; s < 50; ++s) {
        auto p = rng.point(6, 2.0);
        for (int t = 4; t < 6; ++t) {
            BFunction zt = BFunction::fromSmooth(Expr::coord(t));
            for (const auto& f : sys.integrals)
                CHECK(sys.structure.bracket(zt, f, p) == 0.0);
        }
    }
}

TEST_CASE("verification thresholds are invariant under affine recentring of integrals") {
    // replacing f by 3*f - 1 keeps involutivity exact and independence high
    for (const char* id : {"can_model(2)", "tw_model(2,2.0)", "hyperbolic(1.0)"}) {
        auto entry = catalogGet(id);
        auto sys = entry.system;
        for (auto& f : sys.integrals) {
            BFunction shifted = linearCombination(3.0, f, -1.0, BFunction::fromSmooth(Expr::number(1.0)));
            f = shifted;
        }
        auto rep = verify(sys, entry.expected);
        CAPTURE(id);
        CHECK(rep.involutivityPass);
        CHECK(rep.independencePass);
    }
}
