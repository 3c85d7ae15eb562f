#include "liouville/phase.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace liouville {

// ---------------------------------------------------------------------------
// PhaseChart

PhaseChart PhaseChart::make(std::vector<BaseCoord> baseCoords) {
    std::vector<std::string> fibers;
    fibers.reserve(baseCoords.size());
    for (const auto& b : baseCoords) fibers.push_back("p_" + b.name);
    return make(std::move(baseCoords), std::move(fibers));
}

PhaseChart PhaseChart::make(std::vector<BaseCoord> baseCoords, std::vector<std::string> fiberNames) {
    if (baseCoords.size() != fiberNames.size())
        throw ChartError("fiber coordinates must pair one-to-one with base coordinates");
    PhaseChart c;
    c.base = std::move(baseCoords);
    c.fiber = std::move(fiberNames);
    std::set<std::string> seen;
    for (const auto& n : c.coordNames())
        if (!seen.insert(n).second) throw ChartError("duplicate coordinate name '" + n + "'");
    return c;
}

std::vector<std::string> PhaseChart::coordNames() const {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(dim()));
    for (const auto& b : base) names.push_back(b.name);
    for (const auto& f : fiber) names.push_back(f);
    for (const auto& t : transverse) names.push_back(t);
    return names;
}

int PhaseChart::indexOf(const std::string& name) const {
    int i = 0;
    for (const auto& b : base) {
        if (b.name == name) return i;
        ++i;
    }
    for (const auto& f : fiber) {
        if (f == name) return i;
        ++i;
    }
    for (const auto& t : transverse) {
        if (t == name) return i;
        ++i;
    }
    return -1;
}

bool PhaseChart::isAngle(int fullIndex) const {
    return fullIndex >= 0 && fullIndex < nBase() && base[static_cast<std::size_t>(fullIndex)].angle;
}

std::vector<double> PhaseChart::wrappedDelta(const std::vector<double>& a,
                                             const std::vector<double>& b) const {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        double x = a[i] - b[i];
        if (isAngle(static_cast<int>(i))) x -= std::round(x);
        d[i] = x;
    }
    return d;
}

double PhaseChart::wrappedDistance(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0.0;
    for (double x : wrappedDelta(a, b)) s += x * x;
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// PoissonStructure construction

namespace {

std::vector<std::vector<Expr>> zeroMatrix(int dim) {
    return std::vector<std::vector<Expr>>(static_cast<std::size_t>(dim),
                                          std::vector<Expr>(static_cast<std::size_t>(dim),
                                                            Expr::number(0.0)));
}

void setAntisym(std::vector<std::vector<Expr>>& m, int i, int j, const Expr& e) {
    m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = e;
    m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = Expr::neg(e);
}

}  // namespace

PoissonStructure PoissonStructure::canonical(PhaseChart chart) {
    PoissonStructure s;
    s.kind_ = StructureKind::Canonical;
    s.chart_ = std::move(chart);
    const int n = s.chart_.nBase();
    s.pi_ = zeroMatrix(s.chart_.dim());
    for (int i = 0; i < n; ++i) setAntisym(s.pi_, i, n + i, Expr::number(1.0));
    s.piB_ = s.pi_;
    return s;
}

PoissonStructure PoissonStructure::twistedB(PhaseChart chart, double c,
                                            const std::string& singularFiber) {
    if (!(c > 0.0)) throw ChartError("twisted-b modular period c must be positive");
    PoissonStructure s;
    s.kind_ = StructureKind::TwistedB;
    s.chart_ = std::move(chart);
    s.c_ = c;
    const int n = s.chart_.nBase();
    int s0 = -1;
    for (int i = 0; i < n; ++i)
        if (s.chart_.fiber[static_cast<std::size_t>(i)] == singularFiber) s0 = i;
    if (s0 < 0) throw ChartError("twisted-b singular coordinate '" + singularFiber +
                                 "' is not a fiber coordinate");
    if (!s.chart_.base[static_cast<std::size_t>(s0)].angle)
        throw ChartError("twisted-b distinguished base coordinate must be an angle");
    const int f0 = n + s0;
    s.singular_ = f0;
    s.pi_ = zeroMatrix(s.chart_.dim());
    s.piB_ = zeroMatrix(s.chart_.dim());
    for (int i = 0; i < n; ++i) {
        if (i == s0) {
            setAntisym(s.pi_, i, n + i, Expr::coord(f0) / Expr::number(c));
            setAntisym(s.piB_, i, n + i, Expr::number(1.0 / c));
        } else {
            setAntisym(s.pi_, i, n + i, Expr::number(1.0));
            setAntisym(s.piB_, i, n + i, Expr::number(1.0));
        }
    }
    return s;
}

PoissonStructure PoissonStructure::canonicalB(PhaseChart chart, const std::string& singularBase) {
    PoissonStructure s;
    s.kind_ = StructureKind::CanonicalB;
    s.chart_ = std::move(chart);
    const int n = s.chart_.nBase();
    int z0 = -1;
    for (int i = 0; i < n; ++i)
        if (s.chart_.base[static_cast<std::size_t>(i)].name == singularBase) z0 = i;
    if (z0 < 0) throw ChartError("canonical-b singular coordinate '" + singularBase +
                                 "' is not a base coordinate");
    s.singular_ = z0;
    s.pi_ = zeroMatrix(s.chart_.dim());
    s.piB_ = zeroMatrix(s.chart_.dim());
    for (int i = 0; i < n; ++i) {
        if (i == z0) {
            setAntisym(s.pi_, i, n + i, Expr::coord(z0));
            setAntisym(s.piB_, i, n + i, Expr::number(1.0));
        } else {
            setAntisym(s.pi_, i, n + i, Expr::number(1.0));
            setAntisym(s.piB_, i, n + i, Expr::number(1.0));
        }
    }
    return s;
}

PoissonStructure PoissonStructure::custom(PhaseChart chart, std::vector<std::vector<Expr>> upper) {
    PoissonStructure s;
    s.kind_ = StructureKind::Custom;
    s.chart_ = std::move(chart);
    const int dim = s.chart_.dim();
    if (static_cast<int>(upper.size()) != dim)
        throw ChartError("custom bivector matrix has wrong dimension");
    s.pi_ = zeroMatrix(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            const Expr& e = upper[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (!e.empty()) setAntisym(s.pi_, i, j, e);
        }
    s.piB_ = s.pi_;
    return s;
}

std::vector<std::vector<double>> PoissonStructure::matrixAt(const std::vector<double>& p) const {
    const int dim = chart_.dim();
    std::vector<std::vector<double>> m(static_cast<std::size_t>(dim),
                                       std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            const Expr& e = pi_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (e.asNumber() && *e.asNumber() == 0.0) continue;
            double v = e.eval(p);
            m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
            m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = -v;
        }
    return m;
}

// ---------------------------------------------------------------------------
// b-coframe differentials, brackets, fields

BCovector PoissonStructure::bDifferential(const BFunction& f, const std::vector<double>& p) const {
    const std::size_t dim = static_cast<std::size_t>(chart_.dim());
    if (p.size() != dim) throw ChartError("point dimension does not match chart");
    Jet j = f.g.empty() ? Jet{0.0, std::vector<double>(dim, 0.0)} : f.g.evalJet(p);

    BCovector d;
    d.coeff = std::move(j.partials);
    d.singularSlot = singular_;
    if (singular_) {
        const std::size_t k = static_cast<std::size_t>(*singular_);
        d.coeff[k] *= p[k];  // ds/s coefficient of the smooth part
        if (f.singularCoord) {
            if (*f.singularCoord == *singular_) {
                d.coeff[k] += f.c;
            } else {
                const std::size_t t = static_cast<std::size_t>(*f.singularCoord);
                if (p[t] == 0.0)
                    throw EvalError("b-function singular in a coordinate with no b-frame");
                d.coeff[t] += f.c / p[t];
            }
        }
    } else if (f.singularCoord) {
        const std::size_t t = static_cast<std::size_t>(*f.singularCoord);
        if (p[t] == 0.0)
            throw EvalError("b-function singular in a coordinate with no b-frame");
        d.coeff[t] += f.c / p[t];
    }
    return d;
}

double PoissonStructure::bracket(const BFunction& f, const BFunction& g,
                                 const std::vector<double>& p) const {
    BCovector df = bDifferential(f, p);
    BCovector dg = bDifferential(g, p);
    const int dim = chart_.dim();
    double sum = 0.0;
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            const Expr& e = piB_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (e.asNumber() && *e.asNumber() == 0.0) continue;
            double v = e.eval(p);
            sum += v * (df.coeff[static_cast<std::size_t>(i)] * dg.coeff[static_cast<std::size_t>(j)] -
                        df.coeff[static_cast<std::size_t>(j)] * dg.coeff[static_cast<std::size_t>(i)]);
        }
    return sum;
}

std::vector<double> PoissonStructure::hamiltonianField(const BFunction& f,
                                                       const std::vector<double>& p) const {
    BCovector df = bDifferential(f, p);
    const int dim = chart_.dim();
    std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            const Expr& e = piB_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (e.asNumber() && *e.asNumber() == 0.0) continue;
            double v = e.eval(p);
            x[static_cast<std::size_t>(j)] += v * df.coeff[static_cast<std::size_t>(i)];
            x[static_cast<std::size_t>(i)] -= v * df.coeff[static_cast<std::size_t>(j)];
        }
    if (singular_) {
        const std::size_t k = static_cast<std::size_t>(*singular_);
        x[k] *= p[k];  // the s-component is s*(smooth): exactly 0 on Z
    }
    return x;
}

double PoissonStructure::jacobiResidual(const std::vector<double>& p) const {
    const int dim = chart_.dim();
    // jets of all non-zero entries
    std::vector<std::vector<Jet>> jets(static_cast<std::size_t>(dim),
                                       std::vector<Jet>(static_cast<std::size_t>(dim)));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            const Expr& e = pi_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (e.asNumber() && *e.asNumber() == 0.0) {
                jets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    Jet{0.0, std::vector<double>(static_cast<std::size_t>(dim), 0.0)};
            } else {
                jets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = e.evalJet(p);
            }
        }
    auto val = [&](int i, int j) { return jets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].value; };
    auto grad = [&](int i, int j, int l) {
        return jets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].partials[static_cast<std::size_t>(l)];
    };
    double worst = 0.0;
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            for (int k = j + 1; k < dim; ++k) {
                double s = 0.0;
                for (int l = 0; l < dim; ++l)
                    s += val(i, l) * grad(j, k, l) + val(j, l) * grad(k, i, l) +
                         val(k, l) * grad(i, j, l);
                worst = std::max(worst, std::fabs(s));
            }
    return worst;
}

double PoissonStructure::liouvillePairing(const std::vector<double>& p,
                                          const std::vector<double>& v) const {
    const int n = chart_.nBase();
    switch (kind_) {
        case StructureKind::Canonical: {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += p[static_cast<std::size_t>(n + i)] * v[static_cast<std::size_t>(i)];
            return s;
        }
        case StructureKind::TwistedB: {
            const int f0 = *singular_;
            const int s0 = f0 - n;
            double as = p[static_cast<std::size_t>(f0)];
            if (as == 0.0) throw EvalError("twisted Liouville form is singular on Z");
            double s = c_ * std::log(std::fabs(as)) * v[static_cast<std::size_t>(s0)];
            for (int i = 0; i < n; ++i)
                if (i != s0)
                    s += p[static_cast<std::size_t>(n + i)] * v[static_cast<std::size_t>(i)];
            return s;
        }
        case StructureKind::CanonicalB: {
            const int z0 = *singular_;
            double z = p[static_cast<std::size_t>(z0)];
            if (z == 0.0) throw EvalError("canonical b Liouville form needs z != 0 for numeric pairing");
            double s = p[static_cast<std::size_t>(n + z0)] * v[static_cast<std::size_t>(z0)] / z;
            for (int i = 0; i < n; ++i)
                if (i != z0)
                    s += p[static_cast<std::size_t>(n + i)] * v[static_cast<std::size_t>(i)];
            return s;
        }
        case StructureKind::Custom:
            throw ChartError("custom structures carry no Liouville one-form");
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Pfaffian and transversality

namespace {

double pfaffianRec(std::vector<std::vector<double>>& m, std::vector<int>& idx) {
    const std::size_t n = idx.size();
    if (n == 0) return 1.0;
    if (n == 2)
        return m[static_cast<std::size_t>(idx[0])][static_cast<std::size_t>(idx[1])];
    double sum = 0.0;
    int i0 = idx[0];
    std::vector<int> rest(idx.begin() + 1, idx.end());
    double sign = 1.0;
    for (std::size_t j = 0; j < rest.size(); ++j) {
        double a = m[static_cast<std::size_t>(i0)][static_cast<std::size_t>(rest[j])];
        if (a != 0.0) {
            std::vector<int> sub;
            sub.reserve(rest.size() - 1);
            for (std::size_t k = 0; k < rest.size(); ++k)
                if (k != j) sub.push_back(rest[k]);
            sum += sign * a * pfaffianRec(m, sub);
        }
        sign = -sign;
    }
    return sum;
}

}  // namespace

double pfaffian(const std::vector<std::vector<double>>& m) {
    const std::size_t n = m.size();
    if (n % 2 != 0) return 0.0;
    std::vector<std::vector<double>> work = m;
    std::vector<int> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
    return pfaffianRec(work, idx);
}

TransversalityReport bTransversality(const PoissonStructure& pi,
                                     const std::vector<std::vector<double>>& samplesOnZ,
                                     double threshold, int zCoord) {
    TransversalityReport rep;
    rep.threshold = threshold;
    if (zCoord < 0) {
        if (!pi.singularIndex()) throw ChartError("structure has no singular coordinate");
        zCoord = *pi.singularIndex();
    }
    if (zCoord >= pi.chart().dim()) throw ChartError("singular coordinate index out of range");
    const std::size_t k = static_cast<std::size_t>(zCoord);
    const double h = 1e-4;
    rep.pass = true;
    for (const auto& sample : samplesOnZ) {
        TransversalitySample s;
        s.point = sample;
        s.point[k] = 0.0;
        s.pfaffianOnZ = pfaffian(pi.matrixAt(s.point));
        auto plus = s.point, minus = s.point;
        plus[k] = h;
        minus[k] = -h;
        s.pfaffianSlope = (pfaffian(pi.matrixAt(plus)) - pfaffian(pi.matrixAt(minus))) / (2.0 * h);
        s.pass = std::fabs(s.pfaffianOnZ) <= 1e-9 && std::fabs(s.pfaffianSlope) >= threshold;
        if (!s.pass) {
            rep.pass = false;
            if (rep.diagnostic.empty()) {
                if (std::fabs(s.pfaffianOnZ) > 1e-9)
                    rep.diagnostic = "Pfaffian does not vanish on Z";
                else
                    rep.diagnostic = "Pfaffian derivative across Z below threshold (vanishing is not transverse)";
            }
        }
        rep.samples.push_back(std::move(s));
    }
    if (rep.pass) rep.diagnostic = "transverse along Z";
    return rep;
}

}  // namespace liouville
