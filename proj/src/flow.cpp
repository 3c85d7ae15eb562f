#include "liouville/flow.hpp"

#include <algorithm>
#include <cmath>

namespace liouville {

namespace {

std::vector<double> axpy(const std::vector<double>& x, double a, const std::vector<double>& y) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + a * y[i];
    return r;
}

double infNormDiff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace

std::vector<double> rk4Step(const VectorField& f, const std::vector<double>& x, double dt) {
    auto k1 = f(x);
    auto k2 = f(axpy(x, dt / 2.0, k1));
    auto k3 = f(axpy(x, dt / 2.0, k2));
    auto k4 = f(axpy(x, dt, k3));
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        r[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return r;
}

std::vector<double> implicitMidpointStep(const VectorField& f, const std::vector<double>& x,
                                         double dt, double tol, int maxIter) {
    // stage equation k = f(x + dt/2 * k), solved by fixed-point iteration
    std::vector<double> k = f(x);
    for (int it = 0; it < maxIter; ++it) {
        std::vector<double> kNext = f(axpy(x, dt / 2.0, k));
        double delta = infNormDiff(kNext, k);
        k = std::move(kNext);
        if (delta <= tol) return axpy(x, dt, k);
    }
    throw FlowError("implicit midpoint stage iteration did not converge");
}

namespace {

// Bounded conserved-quantity surrogate: for f = c log|s| + g this is
// s*exp(-g/c), constant along the flow iff f is, and finite on Z.
double conservedValue(const IntegrableSystem&, const BFunction& f,
                      const std::vector<double>& p) {
    if (!f.singularCoord) return f.g.empty() ? 0.0 : f.g.eval(p);
    double s = p[static_cast<std::size_t>(*f.singularCoord)];
    double g = f.g.empty() ? 0.0 : f.g.eval(p);
    return s * std::exp(-g / f.c);
}

}  // namespace

Trajectory integrate(const IntegrableSystem& sys, int hIndex, const std::vector<double>& p0,
                     double dt, double T, const IntegrateOptions& opt) {
    if (!(dt > 0.0) || !(T > 0.0)) throw FlowError("dt and T must be positive");
    if (hIndex < 0 || hIndex >= sys.nIntegrals()) throw FlowError("integral index out of range");
    if (static_cast<int>(p0.size()) != sys.dim())
        throw FlowError("initial point dimension does not match chart (expected " +
                        std::to_string(sys.dim()) + ")");
    const BFunction& h = sys.integrals[static_cast<std::size_t>(hIndex)];
    VectorField field = [&](const std::vector<double>& x) {
        return sys.structure.hamiltonianField(h, x);
    };

    const long nSteps = std::lround(T / dt);
    Trajectory traj;
    traj.integrator = opt.method == Method::Rk4 ? "rk4" : "implicit_midpoint";

    std::vector<double> ref(sys.integrals.size());
    for (std::size_t j = 0; j < sys.integrals.size(); ++j)
        ref[j] = conservedValue(sys, sys.integrals[j], p0);
    traj.driftPerIntegral.assign(sys.integrals.size(), 0.0);

    std::vector<double> x = p0;
    auto record = [&](long step) {
        double worst = 0.0;
        for (std::size_t j = 0; j < sys.integrals.size(); ++j) {
            double d = std::fabs(conservedValue(sys, sys.integrals[j], x) - ref[j]);
            traj.driftPerIntegral[j] = std::max(traj.driftPerIntegral[j], d);
            worst = std::max(worst, d);
        }
        if (step % opt.stride == 0) {
            traj.times.push_back(static_cast<double>(step) * dt);
            traj.states.push_back(x);
            traj.drift.push_back(worst);
        }
    };
    record(0);
    for (long step = 1; step <= nSteps; ++step) {
        x = opt.method == Method::Rk4
                ? rk4Step(field, x, dt)
                : implicitMidpointStep(field, x, dt, opt.fixedPointTol, opt.fixedPointMaxIter);
        record(step);
    }
    return traj;
}

std::vector<double> combinedFlow(const IntegrableSystem& sys, const std::vector<double>& s,
                                 const std::vector<double>& p0, int steps,
                                 std::vector<std::vector<double>>* path,
                                 std::vector<std::vector<double>>* velocities) {
    if (s.size() != sys.integrals.size())
        throw FlowError("flow-time vector length must match the number of integrals");
    VectorField field = [&](const std::vector<double>& x) {
        std::vector<double> v(x.size(), 0.0);
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (s[j] == 0.0) continue;
            auto xj = sys.structure.hamiltonianField(sys.integrals[j], x);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] += s[j] * xj[i];
        }
        return v;
    };
    std::vector<double> x = p0;
    const double dt = 1.0 / static_cast<double>(steps);
    if (path) {
        path->clear();
        path->push_back(x);
    }
    if (velocities) {
        velocities->clear();
        velocities->push_back(field(x));
    }
    for (int i = 0; i < steps; ++i) {
        x = rk4Step(field, x, dt);
        if (path) path->push_back(x);
        if (velocities) velocities->push_back(field(x));
    }
    return x;
}

std::vector<double> jointFlow(const IntegrableSystem& sys, const std::vector<double>& s,
                              const std::vector<double>& p0, const JointFlowOptions& opt) {
    if (s.size() != sys.integrals.size())
        throw FlowError("flow-time vector length must match the number of integrals");
    std::vector<double> x = p0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] == 0.0) continue;
        const BFunction& f = sys.integrals[j];
        VectorField field = [&](const std::vector<double>& y) {
            return sys.structure.hamiltonianField(f, y);
        };
        const double span = std::fabs(s[j]);
        const int steps = std::max(1, static_cast<int>(std::ceil(span / opt.dtMax)));
        const double dt = s[j] / static_cast<double>(steps);
        for (int i = 0; i < steps; ++i)
            x = opt.method == Method::Rk4 ? rk4Step(field, x, dt)
                                          : implicitMidpointStep(field, x, dt, 1e-12, 50);
    }
    return x;
}

}  // namespace liouville
