#pragma once

#include <Eigen/Core>

#include "vibronic/coords.hpp"
#include "vibronic/params.hpp"

namespace vibronic {

/// Adiabatic surfaces along the C2v-preserving slice (Qy = 0).
/// v1 and v3 are the lower/upper branch of the coupled (A1, A1) pair,
/// v2 the decoupled B2 state.
struct SlicePotentials {
    cdouble v1{};
    cdouble v2{};
    cdouble v3{};
};

/// Closed-form slice potentials of the PJT model; supports order 2 and 3.
SlicePotentials analytic_slice_potentials(const PjtParams& p, double qx);

/// Closed-form JT surfaces together with the complex transformation angle.
/// v1/v2 carry the -/+ branch of the principal square root. theta, lambda
/// and u follow the 2x2 diagonalization; at geometries where the lambda
/// denominator vanishes, pole = true and theta falls back to pi/2.
struct JtAdiabatic {
    cdouble v1{};
    cdouble v2{};
    cdouble theta{};
    cdouble lambda{};
    cdouble u{};
    bool pole = false;
};

JtAdiabatic jt_adiabatic(const JtParams& p, const NuclearCoords& q);

/// Right eigenvector matrix T(theta) of the JT block; satisfies T^T T = I
/// identically (also for complex theta). Column 1 pairs with the +u branch.
Eigen::Matrix2cd jt_eigvecs(cdouble theta);

}  // namespace vibronic
