#include "liouville/catalog.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace liouville {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

BFunction parseIntegral(const std::string& src, const PhaseChart& chart) {
    return promote(parse(src, chart.coordNames()), chart.coordNames());
}

bool nearZero(double v) { return std::fabs(v) <= 1e-9; }

}  // namespace

CatalogEntry canModel(int n) {
    if (n < 1) throw CatalogError("can_model needs n >= 1");
    std::vector<PhaseChart::BaseCoord> base;
    std::vector<std::string> fibers;
    for (int i = 1; i <= n; ++i) {
        base.push_back({"theta" + std::to_string(i), true});
        fibers.push_back("a" + std::to_string(i));
    }
    PhaseChart chart = PhaseChart::make(std::move(base), std::move(fibers));

    CatalogEntry e;
    e.id = "can_model(" + std::to_string(n) + ")";
    e.note = "canonical cotangent model over the " + std::to_string(n) + "-torus";
    e.system.name = e.id;
    e.system.structure = PoissonStructure::canonical(chart);
    e.system.expectedRankR = n;
    for (int i = 1; i <= n; ++i) {
        e.system.integrals.push_back(BFunction::fromSmooth(Expr::coord(n + i - 1)));
        e.system.integralNames.push_back("f" + std::to_string(i));
    }
    e.singularSetDescription = "none (regular everywhere)";
    return e;
}

CatalogEntry twModel(int n, double c) {
    if (n < 1) throw CatalogError("tw_model needs n >= 1");
    if (!(c > 0.0)) throw CatalogError("tw_model needs c > 0");
    std::vector<PhaseChart::BaseCoord> base;
    std::vector<std::string> fibers;
    for (int i = 1; i <= n; ++i) {
        base.push_back({"theta" + std::to_string(i), true});
        fibers.push_back("a" + std::to_string(i));
    }
    PhaseChart chart = PhaseChart::make(std::move(base), std::move(fibers));

    CatalogEntry e;
    e.id = "tw_model(" + std::to_string(n) + "," + num(c) + ")";
    e.note = "twisted b-cotangent model, modular period " + num(c);
    e.system.name = e.id;
    e.system.structure = PoissonStructure::twistedB(chart, c, "a1");
    e.system.expectedRankR = n;
    e.system.integrals.push_back(BFunction::singular(c, n));  // c*log|a1|
    e.system.integralNames.push_back("f1");
    for (int i = 2; i <= n; ++i) {
        e.system.integrals.push_back(BFunction::fromSmooth(Expr::coord(n + i - 1)));
        e.system.integralNames.push_back("f" + std::to_string(i));
    }
    e.singularSetDescription = "none (regular everywhere, including Z)";
    return e;
}

CatalogEntry bDarboux(int n) {
    if (n < 1) throw CatalogError("bdarboux needs n >= 1");
    // local normal form: coordinates (x_1..x_{n-1}, t | y_1..y_{n-1}, z) with
    // Pi = sum dx_i^dy_i-dual blocks plus a z d/dz ^ d/dt block
    std::vector<PhaseChart::BaseCoord> base;
    std::vector<std::string> fibers;
    for (int i = 1; i < n; ++i) {
        base.push_back({"x" + std::to_string(i), false});
        fibers.push_back("y" + std::to_string(i));
    }
    base.push_back({"t", false});
    fibers.push_back("z");
    PhaseChart chart = PhaseChart::make(std::move(base), std::move(fibers));
    const int dim = chart.dim();
    const int tIdx = n - 1, zIdx = 2 * n - 1;

    std::vector<std::vector<Expr>> upper(static_cast<std::size_t>(dim),
                                         std::vector<Expr>(static_cast<std::size_t>(dim)));
    for (int i = 0; i < n - 1; ++i)
        upper[static_cast<std::size_t>(i)][static_cast<std::size_t>(n + i)] = Expr::number(1.0);
    upper[static_cast<std::size_t>(tIdx)][static_cast<std::size_t>(zIdx)] = Expr::coord(zIdx);

    CatalogEntry e;
    e.id = "bdarboux(" + std::to_string(n) + ")";
    e.note = "local b-Darboux normal form, stored as a custom bivector";
    e.system.name = e.id;
    e.system.structure = PoissonStructure::custom(chart, std::move(upper));
    e.system.expectedRankR = n;
    e.system.integrals.push_back(BFunction::fromSmooth(Expr::coord(zIdx)));
    e.system.integralNames.push_back("f1");
    for (int i = 1; i < n; ++i) {
        e.system.integrals.push_back(BFunction::fromSmooth(Expr::coord(n + i - 1)));
        e.system.integralNames.push_back("f" + std::to_string(i + 1));
    }
    e.singularSetDescription = "z = 0 (bivector rank drop, by construction)";
    e.singularSet = [zIdx](const std::vector<double>& p) {
        return nearZero(p[static_cast<std::size_t>(zIdx)]);
    };
    return e;
}

CatalogEntry oscillatorB() {
    PhaseChart chart = PhaseChart::make(
        {{"theta", true}, {"x1", false}, {"x2", false}}, {"a", "y1", "y2"});

    CatalogEntry e;
    e.id = "oscillator_b";
    e.note = "planar harmonic oscillator lifted over the twisted cylinder: "
             "log-momentum, angular momentum, energy";
    e.system.name = e.id;
    e.system.structure = PoissonStructure::twistedB(chart, 1.0, "a");
    e.system.expectedRankR = 3;
    e.system.integrals.push_back(parseIntegral("log(abs(a))", chart));
    e.system.integrals.push_back(parseIntegral("x1*y2-x2*y1", chart));
    e.system.integrals.push_back(parseIntegral("0.5*(y1^2+y2^2)+0.5*(x1^2+x2^2)", chart));
    e.system.integralNames = {"f1", "L", "H"};
    e.singularSetDescription =
        "x1=x2=y1=y2=0, and the circular orbits x1=y2, x2=-y1 or x1=-y2, x2=y1 "
        "(dL and dH collinear)";
    e.singularSet = [](const std::vector<double>& p) {
        double x1 = p[1], x2 = p[2], y1 = p[4], y2 = p[5];
        bool origin = nearZero(x1) && nearZero(x2) && nearZero(y1) && nearZero(y2);
        bool plus = nearZero(x1 - y2) && nearZero(x2 + y1);
        bool minus = nearZero(x1 + y2) && nearZero(x2 - y1);
        return origin || plus || minus;
    };
    return e;
}

CatalogEntry hyperbolic(double c) {
    if (!(c > 0.0)) throw CatalogError("hyperbolic needs c > 0");
    PhaseChart chart = PhaseChart::make({{"theta", true}, {"x", false}}, {"p", "y"});

    CatalogEntry e;
    e.id = "hyperbolic(" + num(c) + ")";
    e.note = "hyperbolic singularity model over the twisted cylinder";
    e.system.name = e.id;
    e.system.structure = PoissonStructure::twistedB(chart, c, "p");
    e.system.expectedRankR = 2;
    e.system.integrals.push_back(BFunction::singular(c, 2));  // c*log|p|
    e.system.integrals.push_back(parseIntegral("x*y", chart));
    e.system.integralNames = {"f1", "f2"};
    e.singularSetDescription = "x = y = 0";
    e.singularSet = [](const std::vector<double>& p) {
        return nearZero(p[1]) && nearZero(p[3]);
    };
    return e;
}

CatalogEntry focusFocus(double c) {
    if (!(c > 0.0)) throw CatalogError("focusfocus needs c > 0");
    PhaseChart chart = PhaseChart::make(
        {{"theta", true}, {"x1", false}, {"x2", false}}, {"p", "y1", "y2"});

    CatalogEntry e;
    e.id = "focusfocus(" + num(c) + ")";
    e.note = "focus-focus singularity model over the twisted cylinder";
    e.system.name = e.id;
    e.system.structure = PoissonStructure::twistedB(chart, c, "p");
    e.system.expectedRankR = 3;
    e.system.integrals.push_back(BFunction::singular(c, 3));  // c*log|p|
    e.system.integrals.push_back(parseIntegral("x1*y1+x2*y2", chart));
    e.system.integrals.push_back(parseIntegral("x1*y2-y1*x2", chart));
    e.system.integralNames = {"f1", "f2", "f3"};
    e.singularSetDescription = "x1 = x2 = y1 = y2 = 0";
    e.singularSet = [](const std::vector<double>& p) {
        return nearZero(p[1]) && nearZero(p[2]) && nearZero(p[4]) && nearZero(p[5]);
    };
    return e;
}

CatalogEntry affine(int k, int n, const LiftKind& kind) {
    LiftResult lift = affineCylinderSystem(k, n, kind);
    CatalogEntry e;
    e.id = "affine(" + std::to_string(k) + "," + std::to_string(n) + ")";
    e.note = "lifted coordinate translations over the cylinder R^" + std::to_string(k) +
             " x T^" + std::to_string(n - k);
    e.system = lift.system;
    e.system.name = e.id;
    e.warnings = lift.warnings;
    e.singularSetDescription = "none (constant frame)";
    return e;
}

CatalogEntry poissonProduct(int r, int s) {
    if (r < 1 || s < r) throw CatalogError("poisson_product needs 1 <= r <= s");
    std::vector<PhaseChart::BaseCoord> base;
    std::vector<std::string> fibers;
    for (int i = 1; i <= r; ++i) {
        base.push_back({"theta" + std::to_string(i), true});
        fibers.push_back("a" + std::to_string(i));
    }
    PhaseChart chart = PhaseChart::make(std::move(base), std::move(fibers));
    for (int i = 1; i <= s - r; ++i) chart.transverse.push_back("z" + std::to_string(i));

    CatalogEntry e;
    e.id = "poisson_product(" + std::to_string(r) + "," + std::to_string(s) + ")";
    e.note = "canonical torus factor times a rank-zero factor with Casimir coordinates z_i";
    e.system.name = e.id;
    e.system.structure = PoissonStructure::canonical(chart);
    e.system.expectedRankR = r;
    for (int i = 1; i <= r; ++i) {
        e.system.integrals.push_back(BFunction::fromSmooth(Expr::coord(r + i - 1)));
        e.system.integralNames.push_back("f" + std::to_string(i));
    }
    for (int i = 1; i <= s - r; ++i) {
        e.system.integrals.push_back(BFunction::fromSmooth(Expr::coord(2 * r + i - 1)));
        e.system.integralNames.push_back("f" + std::to_string(r + i));
    }
    e.singularSetDescription = "none (constant differentials)";
    return e;
}

std::vector<std::pair<std::string, std::string>> catalogIndex() {
    return {
        {"can_model(n)", "canonical cotangent model over the n-torus"},
        {"tw_model(n,c)", "twisted b-cotangent model with modular period c"},
        {"bdarboux(n)", "local b-Darboux normal form as a custom bivector"},
        {"oscillator_b", "planar harmonic oscillator over the twisted cylinder"},
        {"hyperbolic(c)", "hyperbolic singularity model"},
        {"focusfocus(c)", "focus-focus singularity model"},
        {"affine(k,n[,kind[,c]])", "lifted translations over R^k x T^(n-k); kind: canonical | twisted_b"},
        {"poisson_product(r,s)", "canonical torus factor times a rank-zero factor"},
    };
}

namespace {

struct ParsedSpec {
    std::string id;
    std::vector<std::string> params;
};

ParsedSpec splitSpec(const std::string& spec) {
    ParsedSpec out;
    auto open = spec.find('(');
    if (open == std::string::npos) {
        out.id = spec;
        return out;
    }
    if (spec.back() != ')') throw CatalogError("malformed catalog id '" + spec + "'");
    out.id = spec.substr(0, open);
    std::string inner = spec.substr(open + 1, spec.size() - open - 2);
    std::string cur;
    for (char ch : inner) {
        if (ch == ',') {
            out.params.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            cur += ch;
        }
    }
    if (!cur.empty()) out.params.push_back(cur);
    return out;
}

int asInt(const std::string& s, const std::string& what) {
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw CatalogError("parameter '" + s + "' for " + what + " is not an integer");
    return static_cast<int>(v);
}

double asReal(const std::string& s, const std::string& what) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw CatalogError("parameter '" + s + "' for " + what + " is not a number");
    return v;
}

void expectParams(const ParsedSpec& p, std::size_t lo, std::size_t hi) {
    if (p.params.size() < lo || p.params.size() > hi)
        throw CatalogError("wrong parameter count for catalog id '" + p.id + "'");
}

}  // namespace

CatalogEntry catalogGet(const std::string& spec) {
    ParsedSpec p = splitSpec(spec);
    if (p.id == "can_model") {
        expectParams(p, 1, 1);
        return canModel(asInt(p.params[0], p.id));
    }
    if (p.id == "tw_model") {
        expectParams(p, 2, 2);
        return twModel(asInt(p.params[0], p.id), asReal(p.params[1], p.id));
    }
    if (p.id == "bdarboux") {
        expectParams(p, 1, 1);
        return bDarboux(asInt(p.params[0], p.id));
    }
    if (p.id == "oscillator_b") {
        expectParams(p, 0, 0);
        return oscillatorB();
    }
    if (p.id == "hyperbolic") {
        expectParams(p, 1, 1);
        return hyperbolic(asReal(p.params[0], p.id));
    }
    if (p.id == "focusfocus") {
        expectParams(p, 1, 1);
        return focusFocus(asReal(p.params[0], p.id));
    }
    if (p.id == "affine") {
        expectParams(p, 2, 4);
        int k = asInt(p.params[0], p.id), n = asInt(p.params[1], p.id);
        LiftKind kind = LiftKind::symplectic();
        if (p.params.size() >= 3) {
            if (p.params[2] == "twisted_b") {
                double c = p.params.size() == 4 ? asReal(p.params[3], p.id) : 1.0;
                kind = LiftKind::twistedB(c, "");  // angle chosen by the builder
            } else if (p.params[2] != "canonical") {
                throw CatalogError("affine kind must be canonical or twisted_b");
            }
        }
        return affine(k, n, kind);
    }
    if (p.id == "poisson_product") {
        expectParams(p, 2, 2);
        return poissonProduct(asInt(p.params[0], p.id), asInt(p.params[1], p.id));
    }
    throw CatalogError("unknown catalog id '" + p.id + "'");
}

}  // namespace liouville
