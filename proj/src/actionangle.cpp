#include "liouville/actionangle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace liouville {

namespace {

int flowSteps(const std::vector<double>& s, const LatticeOptions& opt) {
    double span = 0.0;
    for (double v : s) span += std::fabs(v);
    return std::max(opt.minFlowSteps,
                    static_cast<int>(std::ceil(span * opt.stepsPerUnitTime)));
}

/// Wrapped mismatch of the return map at flow time vector s.
Eigen::VectorXd returnResidual(const IntegrableSystem& sys, const std::vector<double>& m,
                               const std::vector<double>& s, const LatticeOptions& opt) {
    auto end = combinedFlow(sys, s, m, flowSteps(s, opt));
    auto delta = sys.chart().wrappedDelta(end, m);
    Eigen::VectorXd r(static_cast<int>(delta.size()));
    for (std::size_t i = 0; i < delta.size(); ++i) r(static_cast<int>(i)) = delta[i];
    return r;
}

/// Gauss-Newton on |Phi_s(m) - m| with a finite-difference Jacobian.
/// Returns true and overwrites s on convergence to within residTol.
bool refineReturn(const IntegrableSystem& sys, const std::vector<double>& m,
                  std::vector<double>& s, double& residual, const LatticeOptions& opt) {
    const int n = static_cast<int>(s.size());
    std::vector<double> cur = s;
    Eigen::VectorXd r = returnResidual(sys, m, cur, opt);
    for (int it = 0; it < 25; ++it) {
        residual = r.lpNorm<Eigen::Infinity>();
        if (residual <= opt.residTol) {
            s = cur;
            return true;
        }
        Eigen::MatrixXd J(r.size(), n);
        for (int j = 0; j < n; ++j) {
            std::vector<double> sp = cur;
            sp[static_cast<std::size_t>(j)] += opt.fdStep;
            J.col(j) = (returnResidual(sys, m, sp, opt) - r) / opt.fdStep;
        }
        Eigen::VectorXd step = J.colPivHouseholderQr().solve(-r);
        for (int j = 0; j < n; ++j) cur[static_cast<std::size_t>(j)] += step(j);
        Eigen::VectorXd rNext = returnResidual(sys, m, cur, opt);
        if (rNext.lpNorm<Eigen::Infinity>() > 10.0 * residual + 1e-12) return false;  // diverging
        r = rNext;
    }
    residual = r.lpNorm<Eigen::Infinity>();
    if (residual <= opt.residTol) {
        s = cur;
        return true;
    }
    return false;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// Column-style Hermite elimination of an integer matrix; returns any basis
/// (first n independent columns after elimination) of the column lattice.
std::vector<std::vector<long long>> integerBasis(std::vector<std::vector<long long>> m) {
    const int rows = static_cast<int>(m.size());
    const int cols = static_cast<int>(m[0].size());
    int pivotCol = 0;
    for (int row = 0; row < rows && pivotCol < cols; ++row) {
        // eliminate row entries right of the pivot column by gcd steps
        for (;;) {
            int best = -1;
            for (int j = pivotCol; j < cols; ++j)
                if (m[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] != 0 &&
                    (best < 0 ||
                     std::llabs(m[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)]) <
                         std::llabs(m[static_cast<std::size_t>(row)][static_cast<std::size_t>(best)])))
                    best = j;
            if (best < 0) break;  // row all zero from pivotCol on
            for (int i = 0; i < rows; ++i)
                std::swap(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(pivotCol)],
                          m[static_cast<std::size_t>(i)][static_cast<std::size_t>(best)]);
            bool clean = true;
            for (int j = pivotCol + 1; j < cols; ++j) {
                long long q = m[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] /
                              m[static_cast<std::size_t>(row)][static_cast<std::size_t>(pivotCol)];
                if (q != 0)
                    for (int i = 0; i < rows; ++i)
                        m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -=
                            q * m[static_cast<std::size_t>(i)][static_cast<std::size_t>(pivotCol)];
                if (m[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] != 0) clean = false;
            }
            if (clean) {
                ++pivotCol;
                break;
            }
        }
    }
    std::vector<std::vector<long long>> basis;
    for (int j = 0; j < pivotCol; ++j) {
        std::vector<long long> col(static_cast<std::size_t>(rows));
        for (int i = 0; i < rows; ++i)
            col[static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        basis.push_back(std::move(col));
    }
    return basis;
}

/// Lagrange-style pairwise size reduction + sign normalization.
void reduceBasis(std::vector<std::vector<double>>& b) {
    const int n = static_cast<int>(b.size());
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                double dot = 0.0, nj = 0.0;
                for (std::size_t k = 0; k < b[static_cast<std::size_t>(i)].size(); ++k) {
                    dot += b[static_cast<std::size_t>(i)][k] * b[static_cast<std::size_t>(j)][k];
                    nj += b[static_cast<std::size_t>(j)][k] * b[static_cast<std::size_t>(j)][k];
                }
                long long t = std::llround(dot / nj);
                if (t == 0) continue;
                std::vector<double> cand = b[static_cast<std::size_t>(i)];
                for (std::size_t k = 0; k < cand.size(); ++k)
                    cand[k] -= static_cast<double>(t) * b[static_cast<std::size_t>(j)][k];
                if (norm2(cand) < norm2(b[static_cast<std::size_t>(i)]) - 1e-12) {
                    b[static_cast<std::size_t>(i)] = std::move(cand);
                    changed = true;
                }
            }
    }
    std::sort(b.begin(), b.end(),
              [](const std::vector<double>& x, const std::vector<double>& y) {
                  return norm2(x) < norm2(y);
              });
    for (auto& v : b)
        for (double x : v) {
            if (std::fabs(x) < 1e-9) continue;
            if (x < 0)
                for (double& y : v) y = -y;
            break;
        }
}

/// Enumerates integer vectors a in [0,k)^n with at least one entry coprime
/// to k (candidates B*a/k strictly enlarging the lattice).
std::vector<std::vector<long long>> fractionalCandidates(int n, long long k) {
    std::vector<std::vector<long long>> out;
    std::vector<long long> a(static_cast<std::size_t>(n), 0);
    for (;;) {
        int i = 0;
        while (i < n && ++a[static_cast<std::size_t>(i)] == k) a[static_cast<std::size_t>(i++)] = 0;
        if (i == n) break;
        bool coprime = false;
        for (long long v : a)
            if (v != 0 && std::gcd(v, k) == 1) coprime = true;
        if (coprime) out.push_back(a);
    }
    return out;
}

}  // namespace

PeriodLattice findPeriodLattice(const IntegrableSystem& sys, const std::vector<double>& m,
                                const LatticeOptions& opt) {
    const int n = sys.nIntegrals();
    if (static_cast<int>(m.size()) != sys.dim())
        throw ActionError("base point dimension does not match chart");
    if (!regularPoint(sys, m)) throw ActionError("not a regular point");

    std::vector<std::vector<double>> basis;
    for (int g = 0; g < n; ++g) {
        // coarse scan along generator g for near-returns, refine the best
        std::vector<double> found;
        double prev2 = std::numeric_limits<double>::infinity();
        double prev1 = std::numeric_limits<double>::infinity();
        for (double t = opt.scanStep; t <= opt.horizon + 1e-12; t += opt.scanStep) {
            std::vector<double> s(static_cast<std::size_t>(n), 0.0);
            s[static_cast<std::size_t>(g)] = t;
            double d = returnResidual(sys, m, s, opt).lpNorm<Eigen::Infinity>();
            // local minimum at the previous grid point
            if (prev1 < opt.captureTol && prev1 <= prev2 && prev1 <= d) {
                std::vector<double> cand(static_cast<std::size_t>(n), 0.0);
                cand[static_cast<std::size_t>(g)] = t - opt.scanStep;
                double resid = 0.0;
                if (refineReturn(sys, m, cand, resid, opt) && norm2(cand) > 1e-4) {
                    found = cand;
                    break;
                }
            }
            prev2 = prev1;
            prev1 = d;
        }
        if (found.empty())
            throw ActionError("no return found along generator " + std::to_string(g + 1) +
                              " within the search horizon");
        basis.push_back(found);
    }

    // sublattice refinement: test fractional combinations B*a/k for returns
    for (bool improved = true; improved;) {
        improved = false;
        for (long long k : {2LL, 3LL}) {
            for (const auto& a : fractionalCandidates(n, k)) {
                std::vector<double> q(static_cast<std::size_t>(n), 0.0);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        q[static_cast<std::size_t>(i)] +=
                            basis[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] *
                            static_cast<double>(a[static_cast<std::size_t>(j)]) /
                            static_cast<double>(k);
                if (returnResidual(sys, m, q, opt).lpNorm<Eigen::Infinity>() > opt.captureTol)
                    continue;
                double resid = 0.0;
                if (!refineReturn(sys, m, q, resid, opt)) continue;
                // enlarge: lattice spanned by columns of [k*I | a] in basis
                // coordinates, scaled back by 1/k
                std::vector<std::vector<long long>> mInt(
                    static_cast<std::size_t>(n), std::vector<long long>(static_cast<std::size_t>(n + 1), 0));
                for (int i = 0; i < n; ++i) {
                    mInt[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = k;
                    mInt[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] =
                        a[static_cast<std::size_t>(i)];
                }
                auto intBasis = integerBasis(std::move(mInt));
                if (static_cast<int>(intBasis.size()) != n)
                    throw ActionError("rank-deficient lattice during refinement");
                std::vector<std::vector<double>> next;
                for (const auto& col : intBasis) {
                    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            v[static_cast<std::size_t>(i)] +=
                                basis[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] *
                                static_cast<double>(col[static_cast<std::size_t>(j)]) /
                                static_cast<double>(k);
                    next.push_back(std::move(v));
                }
                basis = std::move(next);
                improved = true;
                break;
            }
            if (improved) break;
        }
    }

    reduceBasis(basis);

    PeriodLattice lattice;
    lattice.reduced = true;
    for (auto& gen : basis) {
        double resid = 0.0;
        // re-refine: integer combinations accumulate return error linearly
        if (!refineReturn(sys, m, gen, resid, opt))
            throw ActionError("lattice generator lost convergence after reduction");
        lattice.generators.push_back(gen);
        lattice.residuals.push_back(resid);
    }

    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g(i, j) = lattice.generators[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
    if (svd.singularValues()(n - 1) < 1e-8) throw ActionError("rank-deficient lattice");
    return lattice;
}

namespace {

/// <lambda, v> at p for the built-in kinds, tolerating the structure's own
/// singular term when the paired velocity component vanishes exactly.
double cyclePairing(const PoissonStructure& st, const std::vector<double>& p,
                    const std::vector<double>& v) {
    const PhaseChart& chart = st.chart();
    const int n = chart.nBase();
    double sum = 0.0;
    switch (st.kind()) {
        case StructureKind::Canonical:
            for (int i = 0; i < n; ++i)
                sum += p[static_cast<std::size_t>(n + i)] * v[static_cast<std::size_t>(i)];
            return sum;
        case StructureKind::TwistedB: {
            int sFiber = *st.singularIndex();
            int sBase = sFiber - n;
            for (int i = 0; i < n; ++i) {
                if (i == sBase) continue;
                sum += p[static_cast<std::size_t>(n + i)] * v[static_cast<std::size_t>(i)];
            }
            double vth = v[static_cast<std::size_t>(sBase)];
            if (vth != 0.0) {
                double as = p[static_cast<std::size_t>(sFiber)];
                if (as == 0.0)
                    throw ActionError("cycle crosses the Liouville-form singularity");
                sum += st.modularC() * std::log(std::fabs(as)) * vth;
            }
            return sum;
        }
        case StructureKind::CanonicalB: {
            int zBase = *st.singularIndex();
            for (int i = 0; i < n; ++i) {
                if (i == zBase) continue;
                sum += p[static_cast<std::size_t>(n + i)] * v[static_cast<std::size_t>(i)];
            }
            double vz = v[static_cast<std::size_t>(zBase)];
            if (vz != 0.0) {
                double z = p[static_cast<std::size_t>(zBase)];
                if (z == 0.0)
                    throw ActionError("cycle crosses the Liouville-form singularity");
                sum += p[static_cast<std::size_t>(n + zBase)] * vz / z;
            }
            return sum;
        }
        case StructureKind::Custom:
            throw ActionError("custom structures carry no Liouville one-form");
    }
    throw ActionError("unknown structure kind");
}

}  // namespace

ActionReport actionIntegrals(const IntegrableSystem& sys, const PeriodLattice& lattice,
                             const std::vector<double>& m, const ActionOptions& opt) {
    if (!sys.structure.hasLiouvilleForm())
        throw ActionError("custom structures carry no Liouville one-form");
    const PhaseChart& chart = sys.chart();
    const int n = chart.nBase();
    const PoissonStructure& st = sys.structure;
    int sBase = -1;
    if (st.kind() == StructureKind::TwistedB)
        sBase = *st.singularIndex() - n;
    else if (st.kind() == StructureKind::CanonicalB)
        sBase = *st.singularIndex();

    ActionReport report;
    for (const auto& gen : lattice.generators) {
        std::vector<std::vector<double>> path, vel;
        combinedFlow(sys, gen, m, opt.loopSamples, &path, &vel);
        report.cycles.push_back(path);

        int wind = 0;
        if (sBase >= 0 && st.kind() == StructureKind::TwistedB)
            wind = static_cast<int>(std::lround(path.back()[static_cast<std::size_t>(sBase)] -
                                                path.front()[static_cast<std::size_t>(sBase)]));
        report.winding.push_back(wind);
        if (wind != 0) {
            report.actions.push_back(std::numeric_limits<double>::quiet_NaN());
            if (report.singularGenerator < 0)
                report.singularGenerator = static_cast<int>(report.actions.size()) - 1;
            continue;
        }

        // trapezoid over the closed loop
        double sum = 0.5 * (cyclePairing(st, path.front(), vel.front()) +
                            cyclePairing(st, path.back(), vel.back()));
        for (std::size_t j = 1; j + 1 < path.size(); ++j)
            sum += cyclePairing(st, path[j], vel[j]);
        double action = sum / static_cast<double>(opt.loopSamples);
        if (opt.normalizeOrientation && action < 0.0) action = -action;
        report.actions.push_back(action);
    }

    if (st.kind() == StructureKind::TwistedB) {
        std::vector<double> onZ = m;
        onZ[static_cast<std::size_t>(*st.singularIndex())] = 0.0;
        report.modularPeriod = modularPeriod(st, Expr::number(1.0), onZ);
        report.c = report.modularPeriod;
        report.singularForm =
            printBFunction(BFunction::singular(report.c, *st.singularIndex()), chart.coordNames());
    }
    return report;
}

double modularPeriod(const PoissonStructure& pi, const Expr& volume,
                     const std::vector<double>& start, const ModularOptions& opt) {
    if (!pi.isB()) throw ActionError("modular period needs a b-type structure");
    if (pi.kind() != StructureKind::TwistedB)
        throw ActionError("leaf-return detection is implemented for the twisted kind");
    const PhaseChart& chart = pi.chart();
    const int dim = chart.dim();
    const int sFiber = *pi.singularIndex();
    const int sBase = sFiber - chart.nBase();
    if (std::fabs(start[static_cast<std::size_t>(sFiber)]) > 1e-12)
        throw ActionError("start point must lie on the critical hypersurface");

    // precompute Pi^{ij} * V for the divergence formula
    std::vector<std::vector<Expr>> prod(static_cast<std::size_t>(dim),
                                        std::vector<Expr>(static_cast<std::size_t>(dim)));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            auto num = pi.pi(i, j).asNumber();
            if (num && *num == 0.0) continue;
            prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = pi.pi(i, j) * volume;
        }

    VectorField u = [&](const std::vector<double>& x) {
        double v = volume.eval(x);
        if (!(v > 0.0)) throw ActionError("volume density is not positive along the flow");
        std::vector<double> out(static_cast<std::size_t>(dim), 0.0);
        for (int j = 0; j < dim; ++j) {
            double acc = 0.0;
            for (int i = 0; i < dim; ++i) {
                const Expr& e = prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                if (e.empty()) continue;
                acc += e.evalJet(x).partials[static_cast<std::size_t>(i)];
            }
            out[static_cast<std::size_t>(j)] = acc / v;
        }
        return out;
    };

    const double theta0 = start[static_cast<std::size_t>(sBase)];
    std::vector<double> x = start;
    double t = 0.0;
    while (t < opt.horizon) {
        std::vector<double> next = rk4Step(u, x, opt.dt);
        double w = next[static_cast<std::size_t>(sBase)] - theta0;
        if (std::fabs(w) >= 1.0) {
            // bisect the crossing inside the last step (single RK4 substep)
            double lo = 0.0, hi = opt.dt;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                auto xm = rk4Step(u, x, mid);
                if (std::fabs(xm[static_cast<std::size_t>(sBase)] - theta0) >= 1.0)
                    hi = mid;
                else
                    lo = mid;
            }
            return t + 0.5 * (lo + hi);
        }
        x = std::move(next);
        t += opt.dt;
    }
    throw ActionError("modular flow made no leaf return within the horizon");
}

}  // namespace liouville
