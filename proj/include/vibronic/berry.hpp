#pragma once

#include <string>
#include <vector>

#include "vibronic/nac.hpp"
#include "vibronic/topology.hpp"

namespace vibronic {

/// Counterclockwise circular loop for geometric-phase evaluation.
struct LoopSpec {
    NuclearCoords center;
    double radius = 0.05;
    int n_points = 512;       // initial discretization, at least 16
    double start_angle = 0.0; // where on the circle the discretization begins
};

enum class BerryMethod { line_integral, holonomy, both };

struct BerryResult {
    /// Reported geometric phase, |tau_signed| (loop-orientation free).
    double tau = 0.0;
    /// Orientation-signed winding value; additive over enclosed degeneracies.
    double tau_signed = 0.0;
    std::array<int, 3> permutation{0, 1, 2};
    int n_points_used = 0;
    int circuits = 1;  // 2 when a branch interchange required double closure
    int branch = 0;    // transported branch (slot at the loop start)
    bool converged = false;
    double method_spread = 0.0;  // |tau_li - tau_hol| when both were computed
    /// Gauge convention used for the single-valued frames.
    std::string gauge = "e_plane_half_angle";
};

/// Geometric phase of the transported eigenstate around the loop.
/// line_integral integrates the single-valued diagonal coupling (tangential
/// finite differences + trapezoid); holonomy accumulates the discrete
/// biorthogonal overlap product of the smoothed frames. Discretization is
/// doubled until tau changes by less than 1e-4. Throws InvalidLoopError when
/// the loop passes within 1e-4 of a known degeneracy (or through one).
BerryResult berry_phase(const ModelParams& model, const LoopSpec& loop,
                        BerryMethod method = BerryMethod::both,
                        const std::vector<DegeneracyPoint>& known = {},
                        double convergence_tol = 1e-4);

}  // namespace vibronic
