#pragma once

#include "vibronic/types.hpp"

namespace vibronic {

/// Scale factor relating bond-stretch displacements to the dimensionless
/// mass-scaled symmetry coordinates, in 1/a0.
inline constexpr double kCoordScale = 2.639255;

/// Equilibrium bond length of the X3+ ion, in a0.
inline constexpr double kEquilibriumBond = 1.65;

/// The totally symmetric mode is frozen at zero throughout the toolkit.
inline constexpr double kSymmetricMode = 0.0;

/// Symmetry-breaking displacement in the degenerate vibrational mode.
/// Holds both cartesian (qx, qy) and polar (rho, phi) representations;
/// rho >= 0 and phi in [0, 2pi), with phi = 0 canonically when rho = 0.
struct NuclearCoords {
    double qx = 0.0;
    double qy = 0.0;
    double rho = 0.0;
    double phi = 0.0;

    static NuclearCoords from_cartesian(double qx, double qy);
    static NuclearCoords from_polar(double rho, double phi);

    /// Bond displacements (dr1, dr2, dr3) in a0 relative to the equilateral
    /// equilibrium; the totally symmetric combination drops out.
    static NuclearCoords from_bond_displacements(double dr1, double dr2, double dr3);
};

/// Euclidean distance between two displacement points.
double distance(const NuclearCoords& a, const NuclearCoords& b);

}  // namespace vibronic
