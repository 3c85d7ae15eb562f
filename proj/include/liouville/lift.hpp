#ifndef LIOUVILLE_LIFT_HPP
#define LIOUVILLE_LIFT_HPP

#include <string>
#include <vector>

#include "liouville/systems.hpp"

namespace liouville {

class LiftError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Commuting generator catalog for abelian base actions.
struct Generator {
    enum class Type {
        Translation,    // d/d<coord> (angle or real base coordinate)
        Rotation,       // x_i d/dx_j - x_j d/dx_i
        Scaling,        // x d/dx
        RadialScaling,  // x_i d/dx_i + x_j d/dx_j
    };
    Type type;
    std::string a;
    std::string b;  // second coordinate for Rotation / RadialScaling

    static Generator translation(std::string coord) { return {Type::Translation, std::move(coord), {}}; }
    static Generator rotation(std::string i, std::string j) { return {Type::Rotation, std::move(i), std::move(j)}; }
    static Generator scaling(std::string coord) { return {Type::Scaling, std::move(coord), {}}; }
    static Generator radialScaling(std::string i, std::string j) { return {Type::RadialScaling, std::move(i), std::move(j)}; }
};

struct ActionSpec {
    std::vector<Generator> generators;
};

struct LiftKind {
    enum class Type { SymplecticCanonical, CanonicalB, TwistedB };
    Type type = Type::SymplecticCanonical;
    double c = 1.0;          // TwistedB modular period
    std::string coordinate;  // TwistedB: distinguished angle; CanonicalB: defining base coord

    static LiftKind symplectic() { return {Type::SymplecticCanonical, 1.0, {}}; }
    static LiftKind twistedB(double c, std::string angle) { return {Type::TwistedB, c, std::move(angle)}; }
    static LiftKind canonicalB(std::string baseCoord) { return {Type::CanonicalB, 1.0, std::move(baseCoord)}; }
};

/// Generator value on the base at the base part of p (affine fields, exact).
std::vector<double> baseField(const Generator& g, const PhaseChart& chart,
                              const std::vector<double>& p);

/// Fundamental vector field of the lifted action on phase space; for the
/// canonical b lift the fiber components are taken with respect to the
/// b-coframe (a generator touching the defining coordinate must be a b-map).
std::vector<double> liftedField(const Generator& g, const LiftKind& kind, const PhaseChart& chart,
                                const std::vector<double>& p);

/// Closed-form moment component <lambda, X^#> of one generator.
BFunction liftIntegral(const Generator& g, const LiftKind& kind, const PhaseChart& chart);

/// Numeric pairing <lambda, X^#> at p. Throws EvalError where the pairing is
/// singular (the twisted distinguished translation on Z); the symbolic form
/// is available through liftIntegral.
double momentPairing(const PoissonStructure& structure, const Generator& g,
                     const std::vector<double>& p);

struct LiftResult {
    PoissonStructure structure;
    IntegrableSystem system;
    std::vector<std::string> warnings;
};

/// Builds the lifted Hamiltonian action and its moment map on T*M for an
/// abelian action on the base, yielding an integrable (resp. b-integrable)
/// system. Checks generator commutation and pointwise independence first.
LiftResult buildLift(const PhaseChart& chart, const ActionSpec& action, const LiftKind& kind);

/// Lifted system over the cylinder R^k x T^(n-k) with the parallel basis of
/// coordinate translations.
LiftResult affineCylinderSystem(int k, int n, const LiftKind& kind);

}  // namespace liouville

#endif
