#include "vibronic/adiabatic.hpp"

#include <cmath>
#include <limits>

namespace vibronic {

namespace {
constexpr double kPiHalf = 1.5707963267948966192313216916398;
}

SlicePotentials analytic_slice_potentials(const PjtParams& p, double qx) {
    p.validate();
    if (!std::isfinite(qx)) throw DomainError("analytic_slice_potentials: non-finite qx");

    const cdouble qx2 = qx * qx;
    const cdouble qx3 = qx * qx * qx;
    const cdouble harm = 0.5 * p.omega * qx2;

    cdouble split = p.k * qx + p.g * qx2;        // E-block diagonal splitting
    cdouble couple = p.alpha * qx;               // A-Ex coupling
    cdouble diag3{};                             // common cubic diagonal term
    if (p.order == 3) {
        split += p.mu * qx3;
        couple += p.beta * qx2;
        diag3 = p.nu * qx3;
    }

    const cdouble mean = 0.5 * (p.eps_E + p.eps_A) + harm + diag3 + 0.5 * split;
    const cdouble root =
        std::sqrt(0.25 * (p.eps_A - p.eps_E - split) * (p.eps_A - p.eps_E - split) +
                  couple * couple);

    SlicePotentials v;
    v.v1 = mean - root;
    v.v3 = mean + root;
    v.v2 = p.eps_E + harm + diag3 - split;
    return v;
}

JtAdiabatic jt_adiabatic(const JtParams& p, const NuclearCoords& q) {
    p.validate();
    JtAdiabatic out;

    const double rho = q.rho, phi = q.phi;
    const cdouble mean = p.eps_E + 0.5 * p.omega * rho * rho;
    const cdouble radicand =
        p.k * p.k + p.g * p.g * rho * rho + 2.0 * p.k * p.g * rho * std::cos(3.0 * phi);
    const cdouble gap = rho * std::sqrt(radicand);
    out.v1 = mean - gap;
    out.v2 = mean + gap;

    // lambda = c/b with b, c the diagonal/off-diagonal coefficients of the
    // E-block; the lambda pole corresponds to b = 0 where the eigenvectors
    // are the fixed (1,1)/(1,-1) pair, i.e. theta -> pi/2.
    const cdouble b = p.k * std::cos(phi) + p.g * rho * std::cos(2.0 * phi);
    const cdouble c = p.k * std::sin(phi) - p.g * rho * std::sin(2.0 * phi);
    const double scale = std::abs(p.k) + std::abs(p.g) * rho;
    if (std::abs(b) <= 1e-300 || std::abs(b) < 1e-15 * scale) {
        out.pole = true;
        out.lambda = (std::abs(b) == 0.0) ? cdouble{std::numeric_limits<double>::infinity(), 0.0}
                                          : c / b;
        out.theta = kPiHalf;
        out.u = rho * std::sqrt(b * b + c * c);
    } else {
        out.lambda = c / b;
        out.theta = std::atan(out.lambda);
        out.u = rho * b * std::sqrt(1.0 + out.lambda * out.lambda);
    }
    return out;
}

Eigen::Matrix2cd jt_eigvecs(cdouble theta) {
    if (!is_finite(theta)) throw DomainError("jt_eigvecs: non-finite theta");
    const cdouble ch = std::cos(0.5 * theta);
    const cdouble sh = std::sin(0.5 * theta);
    Eigen::Matrix2cd t;
    t << ch, sh, sh, -ch;
    return t;
}

}  // namespace vibronic
