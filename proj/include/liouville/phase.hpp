#ifndef LIOUVILLE_PHASE_HPP
#define LIOUVILLE_PHASE_HPP

#include <optional>
#include <string>
#include <vector>

#include "liouville/expr.hpp"

namespace liouville {

class ChartError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Cotangent-model chart: base coordinates (angles with period 1, or reals)
/// paired one-to-one with fiber coordinates, plus optional transverse
/// coordinates carrying no symplectic partner (product models).
/// Full coordinate order: base..., fiber..., transverse... .
struct PhaseChart {
    struct BaseCoord {
        std::string name;
        bool angle = false;
    };

    std::vector<BaseCoord> base;
    std::vector<std::string> fiber;       // fiber[i] pairs with base[i]
    std::vector<std::string> transverse;  // usually empty

    /// base coords with default fiber names p_<base>
    static PhaseChart make(std::vector<BaseCoord> baseCoords);
    static PhaseChart make(std::vector<BaseCoord> baseCoords, std::vector<std::string> fiberNames);

    int nBase() const { return static_cast<int>(base.size()); }
    int dim() const { return 2 * nBase() + static_cast<int>(transverse.size()); }
    int fiberIndex(int baseIdx) const { return nBase() + baseIdx; }

    std::vector<std::string> coordNames() const;
    int indexOf(const std::string& name) const;  // -1 if absent
    bool isAngle(int fullIndex) const;

    /// wrapped difference a-b, angles reduced to (-1/2, 1/2]
    std::vector<double> wrappedDelta(const std::vector<double>& a,
                                     const std::vector<double>& b) const;
    double wrappedDistance(const std::vector<double>& a, const std::vector<double>& b) const;
};

/// Coefficients of a one-form in the b-coframe: at the singular slot the
/// entry multiplies ds/s, elsewhere the plain coordinate differentials.
/// For a smooth f the ds/s coefficient is s*(df/ds), which extends
/// continuously across s = 0.
struct BCovector {
    std::vector<double> coeff;
    std::optional<int> singularSlot;
};

enum class StructureKind { Canonical, TwistedB, CanonicalB, Custom };

/// Antisymmetric bivector over a chart. Built-in kinds carry a Liouville
/// one-form and, for the b kinds, a smooth b-frame coefficient matrix so
/// that brackets never divide by the defining coordinate.
class PoissonStructure {
public:
    /// Default state is an empty Custom structure; assign a factory result.
    PoissonStructure() = default;

    static PoissonStructure canonical(PhaseChart chart);
    /// singularFiber names a fiber coordinate; its base partner is the
    /// distinguished angle. Pi = (s/c) dθ_s∧ds block plus canonical blocks.
    static PoissonStructure twistedB(PhaseChart chart, double c, const std::string& singularFiber);
    /// singularBase names a base coordinate z; Pi = z dz∧dp_z block plus
    /// canonical blocks (the dual of the canonical b-symplectic form).
    static PoissonStructure canonicalB(PhaseChart chart, const std::string& singularBase);
    /// Upper-triangular entries of an antisymmetric coefficient matrix.
    static PoissonStructure custom(PhaseChart chart, std::vector<std::vector<Expr>> upper);

    StructureKind kind() const { return kind_; }
    const PhaseChart& chart() const { return chart_; }
    double modularC() const { return c_; }
    std::optional<int> singularIndex() const { return singular_; }
    bool isB() const { return kind_ == StructureKind::TwistedB || kind_ == StructureKind::CanonicalB; }

    /// Pi^{ij} in the plain coordinate frame.
    const Expr& pi(int i, int j) const { return pi_[i][j]; }
    /// Pi^{ij} in the frame with s∂s replacing ∂s (equals pi() off the b kinds).
    const Expr& piB(int i, int j) const { return piB_[i][j]; }

    /// Plain-frame coefficient matrix evaluated at a point.
    std::vector<std::vector<double>> matrixAt(const std::vector<double>& p) const;

    /// Differential of f in the structure's b-coframe. If f is singular in a
    /// coordinate other than the structure's defining one, the plain c/t term
    /// is used and p must avoid t = 0.
    BCovector bDifferential(const BFunction& f, const std::vector<double>& p) const;

    /// {f,g}(p) = Pi(df,dg), evaluated through the b-frame: finite and smooth
    /// across the critical hypersurface.
    double bracket(const BFunction& f, const BFunction& g, const std::vector<double>& p) const;

    /// X_f = Pi(df,.) in plain-frame components. The component along the
    /// defining coordinate s is assembled as s*(smooth), so it vanishes
    /// exactly at s = 0.
    std::vector<double> hamiltonianField(const BFunction& f, const std::vector<double>& p) const;

    /// max over index triples of |cyclic Schouten sum| at p.
    double jacobiResidual(const std::vector<double>& p) const;

    /// <lambda, v> for a tangent vector v at p, built-in kinds only.
    /// Throws EvalError on the singular set of lambda.
    double liouvillePairing(const std::vector<double>& p, const std::vector<double>& v) const;

    bool hasLiouvilleForm() const { return kind_ != StructureKind::Custom; }

private:
    StructureKind kind_ = StructureKind::Custom;
    PhaseChart chart_;
    double c_ = 1.0;
    std::optional<int> singular_;
    std::vector<std::vector<Expr>> pi_;
    std::vector<std::vector<Expr>> piB_;
};

struct TransversalitySample {
    std::vector<double> point;
    double pfaffianOnZ = 0.0;
    double pfaffianSlope = 0.0;  // d(pf)/ds across Z
    bool pass = false;
};

struct TransversalityReport {
    bool pass = false;
    double threshold = 1e-6;
    std::vector<TransversalitySample> samples;
    std::string diagnostic;
};

/// Pfaffian of an antisymmetric matrix; recursive expansion for dim <= 8,
/// sign-fixed square root of the determinant beyond.
double pfaffian(const std::vector<std::vector<double>>& m);

/// Checks b-transversality at sample points on Z: the Pfaffian
/// of Pi vanishes on Z and its derivative across Z clears the threshold.
/// zCoord overrides the structure's own defining coordinate (required for
/// Custom structures, which carry none).
TransversalityReport bTransversality(const PoissonStructure& pi,
                                     const std::vector<std::vector<double>>& samplesOnZ,
                                     double threshold = 1e-6, int zCoord = -1);

}  // namespace liouville

#endif
