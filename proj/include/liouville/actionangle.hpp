#ifndef LIOUVILLE_ACTIONANGLE_HPP
#define LIOUVILLE_ACTIONANGLE_HPP

#include <string>
#include <vector>

#include "liouville/flow.hpp"

namespace liouville {

class ActionError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Basis of joint-flow times returning a torus point to itself.
struct PeriodLattice {
    std::vector<std::vector<double>> generators;  // n vectors in R^n
    std::vector<double> residuals;                // wrapped return distance per generator
    bool reduced = false;                         // basis canonicalized by integer column ops
};

struct LatticeOptions {
    double scanStep = 0.05;
    double horizon = 100.0;
    double residTol = 1e-8;
    double captureTol = 0.2;    // coarse-scan acceptance before refinement
    double fdStep = 1e-6;       // return-map Jacobian step
    int stepsPerUnitTime = 400; // flow resolution during the search
    int minFlowSteps = 800;
};

/// Finds n independent return vectors of the joint flow through m:
/// per-generator coarse scan, Gauss-Newton refinement of the return map,
/// sublattice refinement by fractional candidates, integer reduction.
PeriodLattice findPeriodLattice(const IntegrableSystem& sys, const std::vector<double>& m,
                                const LatticeOptions& opt = {});

struct ActionOptions {
    int loopSamples = 2000;  // quadrature nodes per cycle
    /// Cycle orientation is flipped when it would make an action negative;
    /// disable to test GL(n,Z) covariance of the raw signed values.
    bool normalizeOrientation = true;
};

struct ActionReport {
    /// One action per lattice generator; the singular direction (b-case)
    /// carries NaN here and is reported through c / singularForm instead.
    std::vector<double> actions;
    std::vector<int> winding;  // winding of the distinguished angle per generator (b-case)
    int singularGenerator = -1;
    double c = 0.0;                 // coefficient of the log direction (b-case)
    std::string singularForm;       // printable c*log(abs(s)) form
    double modularPeriod = 0.0;     // b-case estimate, unit volume
    std::vector<std::vector<std::vector<double>>> cycles;  // sampled loops
};

/// Mineur reconstruction: p_i is the loop integral of the Liouville one-form
/// over the cycle traced by lattice generator i, by trapezoid quadrature on
/// >= 1000 samples. The cycle winding the distinguished angle of a b
/// structure is divergent and reported symbolically.
ActionReport actionIntegrals(const IntegrableSystem& sys, const PeriodLattice& lattice,
                             const std::vector<double>& m, const ActionOptions& opt = {});

struct ModularOptions {
    double dt = 1e-3;
    double horizon = 100.0;
};

/// First-return time of the modular vector field of (Pi, volume) to the
/// symplectic leaf of start (a point on Z), detected as one full winding of
/// the distinguished angle. The field is computed by the divergence formula
/// u^j = sum_i d_i(Pi^{ij} V) / V.
double modularPeriod(const PoissonStructure& pi, const Expr& volume,
                     const std::vector<double>& start, const ModularOptions& opt = {});

}  // namespace liouville

#endif
