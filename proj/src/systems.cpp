#include "liouville/systems.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace liouville {

// ---------------------------------------------------------------------------
// PointSampler: splitmix64, deterministic across platforms.

PointSampler::PointSampler(const PhaseChart& chart, std::uint64_t seed, double box)
    : chart_(chart), state_(seed ^ 0x9e3779b97f4a7c15ULL), box_(box) {}

double PointSampler::next01() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

std::vector<double> PointSampler::sample() {
    const int dim = chart_.dim();
    std::vector<double> p(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        double u = next01();
        p[static_cast<std::size_t>(i)] = chart_.isAngle(i) ? u : box_ * (2.0 * u - 1.0);
    }
    return p;
}

std::vector<double> PointSampler::sampleOnZ(int singularIndex) {
    auto p = sample();
    p[static_cast<std::size_t>(singularIndex)] = 0.0;
    return p;
}

std::vector<double> PointSampler::sampleOffZ(int singularIndex, double minDistance) {
    for (;;) {
        auto p = sample();
        if (std::fabs(p[static_cast<std::size_t>(singularIndex)]) >= minDistance) return p;
    }
}

// ---------------------------------------------------------------------------

double independenceSigmaMin(const IntegrableSystem& sys, const std::vector<double>& p) {
    const int s = sys.nIntegrals();
    const int dim = sys.dim();
    Eigen::MatrixXd m(s, dim);
    for (int i = 0; i < s; ++i) {
        BCovector d = sys.structure.bDifferential(sys.integrals[static_cast<std::size_t>(i)], p);
        for (int j = 0; j < dim; ++j) m(i, j) = d.coeff[static_cast<std::size_t>(j)];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

bool regularPoint(const IntegrableSystem& sys, const std::vector<double>& p, double threshold) {
    const int s = sys.nIntegrals();
    const int dim = sys.dim();
    Eigen::MatrixXd m(s, dim);
    for (int i = 0; i < s; ++i) {
        auto x = sys.structure.hamiltonianField(sys.integrals[static_cast<std::size_t>(i)], p);
        for (int j = 0; j < dim; ++j) m(i, j) = x[static_cast<std::size_t>(j)];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1) > threshold;
}

std::vector<double> modularWeights(const IntegrableSystem& sys) {
    if (!sys.structure.isB())
        throw ChartError("modular weights are defined for b structures only");
    const int k = *sys.structure.singularIndex();
    std::vector<double> w;
    w.reserve(sys.integrals.size());
    for (const auto& f : sys.integrals)
        w.push_back(f.singularCoord && *f.singularCoord == k ? f.c : 0.0);
    return w;
}

VerificationReport verify(const IntegrableSystem& sys, const VerifyOptions& opt) {
    VerificationReport rep;
    rep.options = opt;
    const int s = sys.nIntegrals();
    PointSampler sampler(sys.chart(), opt.seed, opt.box);
    const bool isB = sys.structure.isB();
    rep.hasZ = isB;

    std::vector<std::vector<double>> offZ, onZ;
    offZ.reserve(static_cast<std::size_t>(opt.samples));
    for (int i = 0; i < opt.samples; ++i)
        offZ.push_back(isB ? sampler.sampleOffZ(*sys.structure.singularIndex(), opt.offZDistance)
                           : sampler.sample());
    if (isB) {
        onZ.reserve(static_cast<std::size_t>(opt.samples));
        for (int i = 0; i < opt.samples; ++i)
            onZ.push_back(sampler.sampleOnZ(*sys.structure.singularIndex()));
    }

    // involutivity over both sample sets; brackets go through the b-frame
    // and stay finite on Z
    auto scanInvolutivity = [&](const std::vector<std::vector<double>>& pts) {
        for (const auto& p : pts)
            for (int i = 0; i < s; ++i)
                for (int j = i + 1; j < s; ++j) {
                    double v = std::fabs(sys.structure.bracket(
                        sys.integrals[static_cast<std::size_t>(i)],
                        sys.integrals[static_cast<std::size_t>(j)], p));
                    if (v > rep.involutivityMax) {
                        rep.involutivityMax = v;
                        rep.worstPair = {i, j};
                        rep.worstPoint = p;
                    }
                }
    };
    scanInvolutivity(offZ);
    scanInvolutivity(onZ);

    // independence fractions
    auto independentFraction = [&](const std::vector<std::vector<double>>& pts) {
        if (pts.empty()) return 1.0;
        int good = 0;
        for (const auto& p : pts)
            if (independenceSigmaMin(sys, p) > opt.rankThreshold) ++good;
        return static_cast<double>(good) / static_cast<double>(pts.size());
    };
    rep.independenceOffZ = independentFraction(offZ);
    rep.independenceOnZ = isB ? independentFraction(onZ) : 1.0;

    // Jacobi residual on a subset
    const int nj = std::min<int>(opt.jacobiSamples, static_cast<int>(offZ.size()));
    for (int i = 0; i < nj; ++i)
        rep.jacobi = std::max(rep.jacobi, sys.structure.jacobiResidual(offZ[static_cast<std::size_t>(i)]));
    if (isB)
        for (int i = 0; i < std::min<int>(nj, static_cast<int>(onZ.size())); ++i)
            rep.jacobi = std::max(rep.jacobi,
                                  sys.structure.jacobiResidual(onZ[static_cast<std::size_t>(i)]));

    if (isB) {
        std::vector<std::vector<double>> zSamples(
            onZ.begin(), onZ.begin() + std::min<std::size_t>(onZ.size(),
                                                             static_cast<std::size_t>(opt.transversalitySamples)));
        rep.transversality = bTransversality(sys.structure, zSamples, 1e-6);
        rep.transversalityPass = rep.transversality.pass;
        rep.modularWeights = modularWeights(sys);
    }

    rep.jacobiPass = rep.jacobi <= opt.tolJacobi;
    rep.involutivityPass = rep.involutivityMax <= opt.tolInvolutivity;
    rep.independencePass = rep.independenceOffZ >= opt.minIndependence &&
                           (!isB || rep.independenceOnZ >= opt.minIndependence);
    return rep;
}

}  // namespace liouville
