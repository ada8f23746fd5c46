#pragma once

#include <utility>
#include <vector>

#include "vibronic/eigensystem.hpp"
#include "vibronic/params.hpp"

namespace vibronic {

enum class DegeneracyKind { conical_intersection, exceptional_point };

/// A point where two complex adiabatic surfaces become degenerate.
struct DegeneracyPoint {
    NuclearCoords coords;
    DegeneracyKind kind = DegeneracyKind::exceptional_point;
    std::pair<int, int> branches{0, 1};
    double residual = 0.0;   // |V_i - V_j| at the point, Hartree
    double rigidity = 0.0;   // phase rigidity of the pair
    bool extrapolated = false;
};

enum class SeamKind { re_seam, im_seam };

/// Curve along which only the real parts (re_seam) or only the imaginary
/// parts (im_seam) of two surfaces are degenerate.
struct SeamCurve {
    SeamKind kind = SeamKind::re_seam;
    std::vector<NuclearCoords> points;
    std::pair<int, int> branches{0, 1};
};

struct SeamScan {
    std::vector<SeamCurve> curves;
    /// Set for bound-state parameters where Im(V1 - V2) vanishes identically;
    /// no curves are emitted in that case.
    bool im_degenerate_everywhere = false;
};

/// Annular search window in polar coordinates (angles in radians).
struct PolarRegion {
    double rho_min = 0.0;
    double rho_max = 0.6;
    double phi_min = 0.0;
    double phi_max = 6.283185307179586476925286766559;
};

struct TopologyOptions {
    double grid_d_rho = 0.002;
    double grid_d_phi = 0.25 * 3.14159265358979323846 / 180.0;
    double merge_tol = 1e-6;
    /// Beyond this radius results carry the extrapolated flag.
    double validity_rho = 0.6;
};

/// Radius of the finite-rho degeneracies of the JT model, |k| / |g|.
/// Throws for g = 0 (the linear model only has the central intersection).
double jt_critical_radius(const JtParams& p);

/// Angles (radians, in [0, 2pi)) at which the Re/Im degeneracy seams of the
/// JT model cross the circle of the given radius; up to six solutions.
/// Empty when the circle misses all seams. Throws for real-valued k, g where
/// the seam condition degenerates.
std::vector<double> jt_seam_angles(const JtParams& p, double rho);

/// Locates and classifies all two-state degeneracies inside the region.
/// Gap minima found on a coarse polar grid are polished to machine accuracy
/// in extended precision and classified through the phase rigidity of the
/// coalescing pair. Results are sorted by (rho, phi).
std::vector<DegeneracyPoint> find_exceptional_points(const ModelParams& model,
                                                     const PolarRegion& region,
                                                     const TopologyOptions& opts = {});

/// Contour-traces the Re/Im degeneracy seams of the lower surface pair.
/// Seam polylines are root-polished point by point and split where their
/// kind changes (which happens at exceptional points).
SeamScan trace_seams(const ModelParams& model, const PolarRegion& region,
                     const TopologyOptions& opts = {});

/// Rectangular or polar evaluation grid. For cartesian grids, axis_a is qx
/// and axis_b is qy; for polar grids, axis_a is rho and axis_b is phi.
struct GridAxis {
    double lo = 0.0;
    double hi = 0.0;
    int n = 1;
};

struct GridSpec {
    bool polar = false;
    GridAxis axis_a;
    GridAxis axis_b;
};

struct SurfacePoint {
    NuclearCoords q;
    std::array<cdouble, 3> v{};
    double rigidity = 1.0;  // phase rigidity of the closest pair
};

struct SurfaceTable {
    int dim = 3;
    GridSpec spec;
    /// Row-major over (axis_b outer, axis_a inner); branch labels are kept
    /// continuous along each inner row and across row starts.
    std::vector<SurfacePoint> points;
};

SurfaceTable grid_scan(const ModelParams& model, const GridSpec& spec);

namespace detail {

/// (V_i - V_j)^2 of the sorted lower pair; single-valued even where branch
/// labels swap, so its imaginary part is the seam indicator field.
cdouble lower_pair_gap_squared(const ModelParams& model, const NuclearCoords& q);

/// Extended-precision pair analysis of the model at (rho, phi), evaluated on
/// the deviatoric matrix so that gap quantities avoid large cancellations.
PairAnalysis model_pair_analysis(const ModelParams& model, long double rho, long double phi);

}  // namespace detail

}  // namespace vibronic
