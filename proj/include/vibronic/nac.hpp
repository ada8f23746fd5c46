#pragma once

#include <vector>

#include "vibronic/adiabatic.hpp"
#include "vibronic/path_trace.hpp"

namespace vibronic {

enum class NacGauge { raw, single_valued };

/// First-derivative nonadiabatic coupling matrix at one geometry; each entry
/// is a 2-vector with cartesian components (fx, fy). In the raw gauge the
/// frame is biorthogonally normalized pointwise and the diagonal vanishes;
/// the single_valued gauge applies the common phase exp(-i Re(theta)/2)
/// built from the E-plane rotation angle of the tracked lower branch, which
/// makes frames single-valued around closed loops.
struct NacField {
    int dim = 3;
    NacGauge gauge = NacGauge::single_valued;
    Eigen::Matrix3cd fx = Eigen::Matrix3cd::Zero();
    Eigen::Matrix3cd fy = Eigen::Matrix3cd::Zero();
};

/// Polar components (f_rho, f_phi) of one NAC entry at azimuth phi.
std::pair<cdouble, cdouble> nac_polar_entry(const NacField& f, int n, int m, double phi);

/// Closed-form JT coupling: gradient of the complex transformation angle and
/// the single-valued coupling matrix, in polar components.
struct JtNac {
    cdouble grad_theta_rho{};
    cdouble grad_theta_phi{};
    /// F^s entries: diagonal (equal for both states) and the (1,2) entry;
    /// (2,1) is its negative.
    cdouble f_diag_rho{}, f_diag_phi{};
    cdouble f12_rho{}, f12_phi{};
    bool pole = false;  // denominator vanished (coupling singular here)
};

JtNac analytic_jt_nac(const JtParams& p, const NuclearCoords& q);

/// Central-difference evaluation of F = T~ (grad T) on branch-matched,
/// sign-smoothed frames. step is the stencil half-width; the evaluation
/// point must stay at least 10 * step away from any degeneracy. richardson
/// combines the step and half-step stencils, (4 F(h/2) - F(h)) / 3.
NacField numeric_nac(const ModelParams& model, const NuclearCoords& q, double step = 1e-5,
                     NacGauge gauge = NacGauge::single_valued, bool richardson = false);

/// Applies per-point phases exp(i chi_j) (inverse on the dual vectors) to
/// the tracked frames so that closed loops return single-valued frames.
/// chi is derived from the E-plane rotation angle of one tracked branch.
struct GaugeSmoothed {
    PathTrace trace;                  // frames with phases applied
    std::vector<double> chi;          // applied phase per point
    std::vector<cdouble> theta_hat;   // accumulated E-plane angle per point
    int theta_branch = 0;             // branch whose components defined theta
    bool theta_valid = true;          // false when the E-components vanish
    /// Branches that received the phase (the winding E-pair); spectator
    /// branches are single-valued without it.
    std::array<bool, 3> phased{false, false, false};
};

GaugeSmoothed gauge_smooth(const PathTrace& trace, int branch = -1);

/// Derivative-free scalar parts of the second-order coupling operator:
/// ff = sum_k F_nk . F_km and div_f = grad . F_nm, both by central
/// differences of the single-valued coupling field. The first-order operator
/// term (2 F . grad) is exposed through the F field itself.
struct LambdaTerms {
    int dim = 3;
    Eigen::Matrix3cd ff = Eigen::Matrix3cd::Zero();
    Eigen::Matrix3cd div_f = Eigen::Matrix3cd::Zero();
};

LambdaTerms lambda_terms(const ModelParams& model, const NuclearCoords& q, double step = 1e-5);

namespace detail {

/// Continuation increment of the E-plane half-angle between two eigenvectors
/// (ex0, ey0) -> (ex1, ey1): theta_1 - theta_0 with tan(theta/2) = ey/ex.
cdouble theta_hat_increment(cdouble ex0, cdouble ey0, cdouble ex1, cdouble ey1);

}  // namespace detail

}  // namespace vibronic
