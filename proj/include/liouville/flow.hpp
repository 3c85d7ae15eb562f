#ifndef LIOUVILLE_FLOW_HPP
#define LIOUVILLE_FLOW_HPP

#include <functional>
#include <string>
#include <vector>

#include "liouville/systems.hpp"

namespace liouville {

class FlowError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Method { Rk4, ImplicitMidpoint };

/// Uniform-grid trajectory. Angle coordinates are stored unwrapped in R;
/// the chart carries the period metadata.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::string integrator;
    /// per step, max over integrals of the conserved-quantity drift
    std::vector<double> drift;
    /// per integral, max drift along the whole trajectory
    std::vector<double> driftPerIntegral;
};

struct IntegrateOptions {
    Method method = Method::ImplicitMidpoint;
    double fixedPointTol = 1e-12;
    int fixedPointMaxIter = 50;
    /// keep only every n-th state (times/drift arrays follow); 1 keeps all
    int stride = 1;
};

using VectorField = std::function<std::vector<double>(const std::vector<double>&)>;

/// One integrator step of dx/dt = f(x).
std::vector<double> rk4Step(const VectorField& f, const std::vector<double>& x, double dt);
std::vector<double> implicitMidpointStep(const VectorField& f, const std::vector<double>& x,
                                         double dt, double tol, int maxIter);

/// Integrates the Hamiltonian flow of integrals[hIndex] and records the
/// drift of every integral. Singular integrals are monitored through the
/// bounded surrogate s*exp(-g/c), which is constant iff the b-function is,
/// so the diagnostic stays finite on and near Z.
Trajectory integrate(const IntegrableSystem& sys, int hIndex, const std::vector<double>& p0,
                     double dt, double T, const IntegrateOptions& opt = {});

struct JointFlowOptions {
    double dtMax = 1e-3;  // cap on the time step per unit flow time
    Method method = Method::Rk4;
};

/// Composes the time-s_i flows of the X_{f_i} in index order.
std::vector<double> jointFlow(const IntegrableSystem& sys, const std::vector<double>& s,
                              const std::vector<double>& p0, const JointFlowOptions& opt = {});

/// Time-1 flow of sum_i s_i X_{f_i}; equal to jointFlow for commuting
/// integrals and cheaper to sample along. Optionally records the path.
std::vector<double> combinedFlow(const IntegrableSystem& sys, const std::vector<double>& s,
                                 const std::vector<double>& p0, int steps,
                                 std::vector<std::vector<double>>* path = nullptr,
                                 std::vector<std::vector<double>>* velocities = nullptr);

}  // namespace liouville

#endif
