#include "liouville/lift.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace liouville {

namespace {

int baseIndexOf(const PhaseChart& chart, const std::string& name) {
    for (int i = 0; i < chart.nBase(); ++i)
        if (chart.base[static_cast<std::size_t>(i)].name == name) return i;
    throw LiftError("generator coordinate '" + name + "' is not a base coordinate");
}

bool touches(const Generator& g, const std::string& coord) {
    return g.a == coord || (!g.b.empty() && g.b == coord);
}

// Base fields are affine; value plus constant Jacobian describe them exactly.
struct AffineField {
    Eigen::VectorXd constant;
    Eigen::MatrixXd jacobian;
    Eigen::VectorXd at(const Eigen::VectorXd& x) const { return constant + jacobian * x; }
};

AffineField affineBaseField(const Generator& g, const PhaseChart& chart) {
    const int n = chart.nBase();
    AffineField f{Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
    switch (g.type) {
        case Generator::Type::Translation:
            f.constant(baseIndexOf(chart, g.a)) = 1.0;
            break;
        case Generator::Type::Rotation: {
            int i = baseIndexOf(chart, g.a), j = baseIndexOf(chart, g.b);
            f.jacobian(j, i) = 1.0;   // x_i d/dx_j
            f.jacobian(i, j) = -1.0;  // -x_j d/dx_i
            break;
        }
        case Generator::Type::Scaling:
            f.jacobian(baseIndexOf(chart, g.a), baseIndexOf(chart, g.a)) = 1.0;
            break;
        case Generator::Type::RadialScaling: {
            int i = baseIndexOf(chart, g.a), j = baseIndexOf(chart, g.b);
            f.jacobian(i, i) = 1.0;
            f.jacobian(j, j) = 1.0;
            break;
        }
    }
    return f;
}

Eigen::VectorXd basePart(const PhaseChart& chart, const std::vector<double>& p) {
    Eigen::VectorXd x(chart.nBase());
    for (int i = 0; i < chart.nBase(); ++i) x(i) = p[static_cast<std::size_t>(i)];
    return x;
}

}  // namespace

std::vector<double> baseField(const Generator& g, const PhaseChart& chart,
                              const std::vector<double>& p) {
    AffineField f = affineBaseField(g, chart);
    Eigen::VectorXd v = f.at(basePart(chart, p));
    std::vector<double> out(static_cast<std::size_t>(chart.nBase()));
    for (int i = 0; i < chart.nBase(); ++i) out[static_cast<std::size_t>(i)] = v(i);
    return out;
}

std::vector<double> liftedField(const Generator& g, const LiftKind& kind, const PhaseChart& chart,
                                const std::vector<double>& p) {
    const int n = chart.nBase();
    AffineField f = affineBaseField(g, chart);
    Eigen::VectorXd x = basePart(chart, p);
    Eigen::VectorXd xdot = f.at(x);

    std::vector<double> out(static_cast<std::size_t>(chart.dim()), 0.0);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = xdot(i);

    if (kind.type == LiftKind::Type::CanonicalB && touches(g, kind.coordinate)) {
        // b-cotangent lift: the only supported generator touching the
        // defining coordinate is its scaling (a b-map); the pullback of
        // dz/z is invariant, so the paired momentum is frozen.
        if (g.type != Generator::Type::Scaling)
            throw LiftError("canonical b lift needs Z-preserving generators; only scaling may touch '" +
                            kind.coordinate + "'");
        return out;  // fiber part identically zero
    }

    // ordinary cotangent lift: pdot = -J^T p
    Eigen::VectorXd mom(n);
    for (int i = 0; i < n; ++i) mom(i) = p[static_cast<std::size_t>(n + i)];
    Eigen::VectorXd pdot = -f.jacobian.transpose() * mom;
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(n + i)] = pdot(i);
    return out;
}

BFunction liftIntegral(const Generator& g, const LiftKind& kind, const PhaseChart& chart) {
    const int n = chart.nBase();
    auto fiberCoord = [&](const std::string& baseName) {
        return Expr::coord(n + baseIndexOf(chart, baseName));
    };
    auto baseCoord = [&](const std::string& baseName) {
        return Expr::coord(baseIndexOf(chart, baseName));
    };
    switch (g.type) {
        case Generator::Type::Translation:
            if (kind.type == LiftKind::Type::TwistedB && g.a == kind.coordinate)
                return BFunction::singular(kind.c, n + baseIndexOf(chart, g.a));
            return BFunction::fromSmooth(fiberCoord(g.a));
        case Generator::Type::Rotation:
            return BFunction::fromSmooth(baseCoord(g.a) * fiberCoord(g.b) -
                                         baseCoord(g.b) * fiberCoord(g.a));
        case Generator::Type::Scaling:
            if (kind.type == LiftKind::Type::CanonicalB && g.a == kind.coordinate)
                return BFunction::fromSmooth(fiberCoord(g.a));  // <p_z dz/z, z d/dz> = p_z
            return BFunction::fromSmooth(baseCoord(g.a) * fiberCoord(g.a));
        case Generator::Type::RadialScaling:
            return BFunction::fromSmooth(baseCoord(g.a) * fiberCoord(g.a) +
                                         baseCoord(g.b) * fiberCoord(g.b));
    }
    throw LiftError("unknown generator type");
}

double momentPairing(const PoissonStructure& structure, const Generator& g,
                     const std::vector<double>& p) {
    LiftKind kind;
    switch (structure.kind()) {
        case StructureKind::Canonical:
            kind = LiftKind::symplectic();
            break;
        case StructureKind::TwistedB: {
            int f0 = *structure.singularIndex();
            kind = LiftKind::twistedB(structure.modularC(),
                                      structure.chart().base[static_cast<std::size_t>(f0 - structure.chart().nBase())].name);
            break;
        }
        case StructureKind::CanonicalB:
            kind = LiftKind::canonicalB(
                structure.chart().base[static_cast<std::size_t>(*structure.singularIndex())].name);
            break;
        case StructureKind::Custom:
            throw ChartError("custom structures carry no Liouville one-form");
    }
    auto v = liftedField(g, kind, structure.chart(), p);
    return structure.liouvillePairing(p, v);
}

LiftResult buildLift(const PhaseChart& chart, const ActionSpec& action, const LiftKind& kind) {
    const int n = chart.nBase();
    const int nGen = static_cast<int>(action.generators.size());
    if (nGen < 1 || nGen > n)
        throw LiftError("generator count must be between 1 and the base dimension");

    if (kind.type == LiftKind::Type::TwistedB) {
        const Generator& g0 = action.generators.front();
        if (g0.type != Generator::Type::Translation || g0.a != kind.coordinate)
            throw LiftError("twisted b lift needs its first generator to be the rotation of the "
                            "distinguished circle '" + kind.coordinate + "'");
        int s0 = baseIndexOf(chart, kind.coordinate);
        if (!chart.base[static_cast<std::size_t>(s0)].angle)
            throw LiftError("twisted b distinguished coordinate must be an angle");
        for (std::size_t i = 1; i < action.generators.size(); ++i)
            if (touches(action.generators[i], kind.coordinate))
                throw LiftError("the action must split: only the first generator may act on the "
                                "distinguished circle");
    }

    if (kind.type == LiftKind::Type::CanonicalB) {
        for (const auto& g : action.generators)
            if (touches(g, kind.coordinate) && g.type != Generator::Type::Scaling)
                throw LiftError("canonical b lift needs Z-preserving generators; only scaling may "
                                "touch '" + kind.coordinate + "'");
    }

    std::vector<AffineField> fields;
    fields.reserve(action.generators.size());
    for (const auto& g : action.generators) fields.push_back(affineBaseField(g, chart));

    // abelian requirement: [X_i, X_j] = 0 at random base points
    PointSampler sampler(chart, 1234, 2.0);
    double worstCommutator = 0.0;
    double bestRankSigma = 0.0;
    for (int s = 0; s < 100; ++s) {
        Eigen::VectorXd x = basePart(chart, sampler.sample());
        Eigen::MatrixXd values(n, nGen);
        for (int i = 0; i < nGen; ++i) {
            values.col(i) = fields[static_cast<std::size_t>(i)].at(x);
            for (int j = i + 1; j < nGen; ++j) {
                Eigen::VectorXd lie = fields[static_cast<std::size_t>(j)].jacobian *
                                          fields[static_cast<std::size_t>(i)].at(x) -
                                      fields[static_cast<std::size_t>(i)].jacobian *
                                          fields[static_cast<std::size_t>(j)].at(x);
                worstCommutator = std::max(worstCommutator, lie.lpNorm<Eigen::Infinity>());
            }
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(values);
        bestRankSigma = std::max(bestRankSigma, svd.singularValues()(nGen - 1));
    }
    if (worstCommutator > 1e-10)
        throw LiftError("generators do not commute (|[X_i,X_j]| = " + std::to_string(worstCommutator) + ")");
    if (bestRankSigma <= 1e-9)
        throw LiftError("generators are nowhere linearly independent; the action is not effective");

    LiftResult res{PoissonStructure::canonical(chart), {}, {}};
    switch (kind.type) {
        case LiftKind::Type::SymplecticCanonical:
            res.structure = PoissonStructure::canonical(chart);
            break;
        case LiftKind::Type::TwistedB: {
            int s0 = baseIndexOf(chart, kind.coordinate);
            res.structure = PoissonStructure::twistedB(chart, kind.c,
                                                       chart.fiber[static_cast<std::size_t>(s0)]);
            break;
        }
        case LiftKind::Type::CanonicalB:
            res.structure = PoissonStructure::canonicalB(chart, kind.coordinate);
            res.warnings.push_back(
                "canonical b lifts yield at most n-1 independent moment components on Z; "
                "the result is not a b-integrable system there");
            break;
    }

    res.system.structure = res.structure;
    res.system.name = "lift";
    // a full integrable system needs one generator per base dimension; with
    // fewer, the result is just the commuting moment components
    res.system.expectedRankR = nGen == n ? n : -1;
    for (std::size_t i = 0; i < action.generators.size(); ++i) {
        res.system.integrals.push_back(liftIntegral(action.generators[i], kind, chart));
        res.system.integralNames.push_back("f" + std::to_string(i + 1));
    }
    return res;
}

LiftResult affineCylinderSystem(int k, int n, const LiftKind& kind) {
    if (k < 0 || n < 1 || k > n) throw LiftError("affine cylinder needs 0 <= k <= n, n >= 1");
    const int nAngles = n - k;
    if (kind.type == LiftKind::Type::TwistedB && nAngles < 1)
        throw LiftError("twisted b affine cylinder needs at least one torus factor");

    auto xName = [&](int i) { return k == 1 ? std::string("x") : "x" + std::to_string(i + 1); };
    auto thName = [&](int i) { return nAngles == 1 ? std::string("theta") : "theta" + std::to_string(i + 1); };

    std::vector<PhaseChart::BaseCoord> base;
    std::vector<std::string> fibers;
    ActionSpec action;
    LiftKind effective = kind;

    // twisted lifts list the distinguished circle first; canonical lifts
    // follow the (x..., theta...) parallel basis order
    if (kind.type == LiftKind::Type::TwistedB) {
        base.push_back({thName(0), true});
        fibers.push_back("a_" + thName(0));
        action.generators.push_back(Generator::translation(thName(0)));
        effective.coordinate = thName(0);
    }
    for (int i = 0; i < k; ++i) {
        base.push_back({xName(i), false});
        fibers.push_back("p_" + xName(i));
        action.generators.push_back(Generator::translation(xName(i)));
    }
    for (int i = (kind.type == LiftKind::Type::TwistedB ? 1 : 0); i < nAngles; ++i) {
        base.push_back({thName(i), true});
        fibers.push_back("a_" + thName(i));
        action.generators.push_back(Generator::translation(thName(i)));
    }

    LiftResult res = buildLift(PhaseChart::make(std::move(base), std::move(fibers)), action, effective);
    res.system.name = "affine(" + std::to_string(k) + "," + std::to_string(n) + ")";
    return res;
}

}  // namespace liouville
