#pragma once

#include <Eigen/Core>

#include "vibronic/coords.hpp"
#include "vibronic/params.hpp"

namespace vibronic {

/// Complex symmetric diabatic potential matrix at a fixed geometry.
/// State ordering for dim = 3 is (A, Ex, Ey); for dim = 2 it is (Ex, Ey).
/// Only the top-left dim x dim block of m is meaningful.
struct DiabaticMatrix {
    int dim = 3;
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
};

/// Symmetry-adapted coupling matrices evaluated at Q. j_k and j_g act in the
/// E-block (rows/cols 1,2) only; j_alpha couples the A state to the E pair.
struct CouplingMatrices {
    Eigen::Matrix3d j_k = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d j_g = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d j_alpha = Eigen::Matrix3d::Zero();
};

CouplingMatrices coupling_matrices(const NuclearCoords& q);

/// 3x3 complex symmetric PJT potential. Third-order parameters are supported
/// only on the Qy = 0 slice; elsewhere an UnsupportedRegionError is thrown.
DiabaticMatrix build_pjt_diabatic(const PjtParams& p, const NuclearCoords& q);

/// 2x2 complex symmetric JT potential (E-block only).
DiabaticMatrix build_jt_diabatic(const JtParams& p, const NuclearCoords& q);

/// Diabatic width matrix: Gamma = -2 Im(V^d), entrywise. Real symmetric.
Eigen::Matrix3d gamma_matrix(const PjtParams& p, const NuclearCoords& q);

/// Diabatic matrix for either model.
DiabaticMatrix build_diabatic(const ModelParams& m, const NuclearCoords& q);

namespace detail {

/// Scalar-generic PJT builder used for extended-precision evaluation.
/// rho, phi must already be canonical (rho >= 0). Entries are written
/// symmetrically from single expressions so m(i,j) and m(j,i) are identical.
template <typename Real>
Eigen::Matrix<std::complex<Real>, 3, 3> pjt_entries(const PjtParams& p, Real rho, Real phi) {
    using C = std::complex<Real>;
    const C eps_E{static_cast<Real>(p.eps_E.real()), static_cast<Real>(p.eps_E.imag())};
    const C eps_A{static_cast<Real>(p.eps_A.real()), static_cast<Real>(p.eps_A.imag())};
    const C omega{static_cast<Real>(p.omega.real()), static_cast<Real>(p.omega.imag())};
    const C k{static_cast<Real>(p.k.real()), static_cast<Real>(p.k.imag())};
    const C g{static_cast<Real>(p.g.real()), static_cast<Real>(p.g.imag())};
    const C alpha{static_cast<Real>(p.alpha.real()), static_cast<Real>(p.alpha.imag())};

    const Real c1 = std::cos(phi), s1 = std::sin(phi);
    const Real c2 = std::cos(Real(2) * phi), s2 = std::sin(Real(2) * phi);
    const C harm = Real(0.5) * omega * rho * rho;

    Eigen::Matrix<C, 3, 3> m;
    m.setZero();
    m(0, 0) = eps_A + harm;
    m(1, 1) = eps_E + harm + k * rho * c1 + g * rho * rho * c2;
    m(2, 2) = eps_E + harm - k * rho * c1 - g * rho * rho * c2;
    const C exey = k * rho * s1 - g * rho * rho * s2;
    m(1, 2) = exey;
    m(2, 1) = exey;
    const C aex = alpha * rho * c1;
    const C aey = -alpha * rho * s1;
    m(0, 1) = aex;
    m(1, 0) = aex;
    m(0, 2) = aey;
    m(2, 0) = aey;

    if (p.order == 3) {
        // Slice-only extension: nu Qx^3 on every diagonal, +/- mu Qx^3 onto
        // the E-block splitting, and alpha Qx -> alpha Qx + beta Qx^2 for the
        // A-Ex coupling. Qx = +/- rho on the slice.
        const C beta{static_cast<Real>(p.beta.real()), static_cast<Real>(p.beta.imag())};
        const C nu{static_cast<Real>(p.nu.real()), static_cast<Real>(p.nu.imag())};
        const C mu{static_cast<Real>(p.mu.real()), static_cast<Real>(p.mu.imag())};
        const Real qx = rho * c1;
        const C cubic = nu * qx * qx * qx;
        m(0, 0) += cubic;
        m(1, 1) += cubic + mu * qx * qx * qx;
        m(2, 2) += cubic - mu * qx * qx * qx;
        const C quad = beta * qx * qx;
        m(0, 1) += quad;
        m(1, 0) += quad;
    }
    return m;
}

/// PJT matrix with the common diagonal term (eps_E + harmonic + cubic)
/// removed symbolically, so that pair-gap quantities can be evaluated without
/// large-magnitude cancellation. Eigenvalues are shifted by that common term;
/// eigenvectors and pairwise differences are unchanged.
template <typename Real>
Eigen::Matrix<std::complex<Real>, 3, 3> pjt_entries_deviatoric(const PjtParams& p, Real rho,
                                                               Real phi) {
    using C = std::complex<Real>;
    const C delta_ae{static_cast<Real>(p.eps_A.real()) - static_cast<Real>(p.eps_E.real()),
                     static_cast<Real>(p.eps_A.imag()) - static_cast<Real>(p.eps_E.imag())};
    const C k{static_cast<Real>(p.k.real()), static_cast<Real>(p.k.imag())};
    const C g{static_cast<Real>(p.g.real()), static_cast<Real>(p.g.imag())};
    const C alpha{static_cast<Real>(p.alpha.real()), static_cast<Real>(p.alpha.imag())};

    const Real c1 = std::cos(phi), s1 = std::sin(phi);
    const Real c2 = std::cos(Real(2) * phi), s2 = std::sin(Real(2) * phi);

    Eigen::Matrix<C, 3, 3> m;
    m.setZero();
    C split = k * rho * c1 + g * rho * rho * c2;
    C couple_x = alpha * rho * c1;
    const C couple_y = -alpha * rho * s1;
    const C exey = k * rho * s1 - g * rho * rho * s2;
    m(0, 0) = delta_ae;
    if (p.order == 3) {
        const C beta{static_cast<Real>(p.beta.real()), static_cast<Real>(p.beta.imag())};
        const C mu{static_cast<Real>(p.mu.real()), static_cast<Real>(p.mu.imag())};
        const Real qx = rho * c1;
        split += mu * qx * qx * qx;
        couple_x += beta * qx * qx;
    }
    m(1, 1) = split;
    m(2, 2) = -split;
    m(1, 2) = exey;
    m(2, 1) = exey;
    m(0, 1) = couple_x;
    m(1, 0) = couple_x;
    m(0, 2) = couple_y;
    m(2, 0) = couple_y;
    return m;
}

/// JT E-block with eps_E + harmonic removed; same conventions as above.
template <typename Real>
Eigen::Matrix<std::complex<Real>, 2, 2> jt_entries_deviatoric(const JtParams& p, Real rho,
                                                              Real phi) {
    using C = std::complex<Real>;
    const C k{static_cast<Real>(p.k.real()), static_cast<Real>(p.k.imag())};
    const C g{static_cast<Real>(p.g.real()), static_cast<Real>(p.g.imag())};
    const Real c1 = std::cos(phi), s1 = std::sin(phi);
    const Real c2 = std::cos(Real(2) * phi), s2 = std::sin(Real(2) * phi);
    Eigen::Matrix<C, 2, 2> m;
    const C b = k * rho * c1 + g * rho * rho * c2;
    const C c = k * rho * s1 - g * rho * rho * s2;
    m(0, 0) = b;
    m(1, 1) = -b;
    m(0, 1) = c;
    m(1, 0) = c;
    return m;
}

template <typename Real>
Eigen::Matrix<std::complex<Real>, 2, 2> jt_entries(const JtParams& p, Real rho, Real phi) {
    using C = std::complex<Real>;
    const C eps_E{static_cast<Real>(p.eps_E.real()), static_cast<Real>(p.eps_E.imag())};
    const C omega{static_cast<Real>(p.omega.real()), static_cast<Real>(p.omega.imag())};
    const C k{static_cast<Real>(p.k.real()), static_cast<Real>(p.k.imag())};
    const C g{static_cast<Real>(p.g.real()), static_cast<Real>(p.g.imag())};

    const Real c1 = std::cos(phi), s1 = std::sin(phi);
    const Real c2 = std::cos(Real(2) * phi), s2 = std::sin(Real(2) * phi);
    const C harm = eps_E + Real(0.5) * omega * rho * rho;

    Eigen::Matrix<C, 2, 2> m;
    m(0, 0) = harm + k * rho * c1 + g * rho * rho * c2;
    m(1, 1) = harm - k * rho * c1 - g * rho * rho * c2;
    const C off = k * rho * s1 - g * rho * rho * s2;
    m(0, 1) = off;
    m(1, 0) = off;
    return m;
}

}  // namespace detail

}  // namespace vibronic
