#ifndef LIOUVILLE_SYSTEMS_HPP
#define LIOUVILLE_SYSTEMS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "liouville/phase.hpp"

namespace liouville {

/// Chart + Poisson structure + commuting integrals (b-functions).
struct IntegrableSystem {
    std::string name;
    PoissonStructure structure;
    std::vector<std::string> integralNames;
    std::vector<BFunction> integrals;
    int expectedRankR = -1;  // 2r = max rank of Pi; #integrals = dim - r

    const PhaseChart& chart() const { return structure.chart(); }
    int dim() const { return structure.chart().dim(); }
    int nIntegrals() const { return static_cast<int>(integrals.size()); }
};

struct VerifyOptions {
    int samples = 1000;
    std::uint64_t seed = 42;
    double box = 2.0;                 // reals sampled uniformly in [-box, box]
    double tolJacobi = 1e-12;
    double tolInvolutivity = 1e-9;
    double minIndependence = 0.99;
    double rankThreshold = 1e-6;      // singular-value cutoff for independence
    double offZDistance = 0.1;        // off-Z samples keep |s| >= this
    int jacobiSamples = 100;
    int transversalitySamples = 100;
};

struct VerificationReport {
    double jacobi = 0.0;
    double involutivityMax = 0.0;
    std::pair<int, int> worstPair{-1, -1};
    std::vector<double> worstPoint;
    double independenceOffZ = 0.0;
    double independenceOnZ = 1.0;   // 1.0 when not a b structure (vacuous)
    bool hasZ = false;
    TransversalityReport transversality;
    std::vector<double> modularWeights;
    VerifyOptions options;

    bool jacobiPass = false;
    bool involutivityPass = false;
    bool independencePass = false;
    bool transversalityPass = true;
    bool pass() const {
        return jacobiPass && involutivityPass && independencePass && transversalityPass;
    }
};

/// Deterministic sampler for verification and tests: angles uniform over a
/// period, reals uniform in [-box, box].
class PointSampler {
public:
    PointSampler(const PhaseChart& chart, std::uint64_t seed, double box = 2.0);
    /// Sample anywhere (b structures: no constraint on s).
    std::vector<double> sample();
    /// Sample with the given coordinate held at 0.
    std::vector<double> sampleOnZ(int singularIndex);
    /// Sample with |coordinate| >= minDistance.
    std::vector<double> sampleOffZ(int singularIndex, double minDistance);

private:
    const PhaseChart& chart_;
    std::uint64_t state_;
    double box_;
    double next01();
};

/// Statistical verification of the defining properties: involutivity,
/// independence of the differentials as b-forms (off Z and on Z),
/// Jacobi residual, transversality, modular weights.
VerificationReport verify(const IntegrableSystem& sys, const VerifyOptions& opt = {});

/// True iff the Hamiltonian vector fields of all integrals are linearly
/// independent at p (smallest singular value above the rank threshold).
bool regularPoint(const IntegrableSystem& sys, const std::vector<double>& p,
                  double threshold = 1e-6);

/// c-coefficients of the integrals with respect to the structure's
/// defining coordinate. Errors on non-b structures.
std::vector<double> modularWeights(const IntegrableSystem& sys);

/// Smallest singular value of the matrix whose rows are the b-coframe
/// differentials of the integrals at p.
double independenceSigmaMin(const IntegrableSystem& sys, const std::vector<double>& p);

}  // namespace liouville

#endif
