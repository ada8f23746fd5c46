#include "vibronic/berry.hpp"

#include <cmath>

#include "vibronic/diabatic.hpp"

namespace vibronic {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<NuclearCoords> circle_points(const LoopSpec& loop, int n, int circuits) {
    std::vector<NuclearCoords> pts;
    pts.reserve(static_cast<std::size_t>(n) * circuits + 1);
    for (int c = 0; c < circuits; ++c) {
        for (int i = 0; i < n; ++i) {
            const double a = loop.start_angle + kTwoPi * i / n;
            pts.push_back(NuclearCoords::from_cartesian(loop.center.qx + loop.radius * std::cos(a),
                                                        loop.center.qy + loop.radius * std::sin(a)));
        }
    }
    pts.push_back(pts.front());
    return pts;
}

std::pair<cdouble, cdouble> e_components(const Eigen::Matrix3cd& t, int dim, int branch) {
    if (dim == 2) return {t(0, branch), t(1, branch)};
    return {t(1, branch), t(2, branch)};
}

// Winding of the transported branch between two loop nodes, evaluated by
// tangential finite differences of the E-plane angle off the loop nodes.
double tangential_dtheta(const ModelParams& model, const GaugeSmoothed& gs, std::size_t j,
                         double h, int branch) {
    const int dim = gs.trace.dim;
    const NuclearCoords& q = gs.trace.points[j];
    // Unit tangent of the counterclockwise circle at this node.
    const std::size_t n = gs.trace.points.size();
    const NuclearCoords& qn = gs.trace.points[(j + 1) % (n - 1)];
    const NuclearCoords& qp = gs.trace.points[(j + n - 2) % (n - 1)];
    double tx = qn.qx - qp.qx;
    double ty = qn.qy - qp.qy;
    const double tn = std::hypot(tx, ty);
    if (tn == 0.0) return 0.0;
    tx /= tn;
    ty /= tn;

    const auto frame_at = [&](double s) {
        const NuclearCoords qq = NuclearCoords::from_cartesian(q.qx + s * tx, q.qy + s * ty);
        const Eigensystem es = eig_complex_symmetric(build_diabatic(model, qq));
        if (es.any_coalesced) {
            throw InvalidLoopError("berry_phase: stencil touched a coalescence");
        }
        const auto a = detail::assign_branches(gs.trace.branch_vectors[j], es.vectors, dim);
        if (a.min_normalized_overlap <= 0.5) {
            throw TrackingError("berry_phase: ambiguous stencil matching", j);
        }
        Eigen::Vector3cd w = es.vectors.col(a.perm[branch]);
        cdouble overlap{};
        for (int r = 0; r < dim; ++r) overlap += gs.trace.branch_vectors[j](r, branch) * w(r);
        if (overlap.real() < 0.0) w = -w;
        return w;
    };

    const Eigen::Vector3cd wp = frame_at(h);
    const Eigen::Vector3cd wm = frame_at(-h);
    const auto [ex0, ey0] = e_components(gs.trace.branch_vectors[j], dim, branch);
    const auto exp_p = (dim == 2) ? wp(0) : wp(1);
    const auto eyp_p = (dim == 2) ? wp(1) : wp(2);
    const auto exp_m = (dim == 2) ? wm(0) : wm(1);
    const auto eyp_m = (dim == 2) ? wm(1) : wm(2);
    const cdouble dplus = detail::theta_hat_increment(ex0, ey0, exp_p, eyp_p);
    const cdouble dminus = detail::theta_hat_increment(ex0, ey0, exp_m, eyp_m);
    return (dplus - dminus).real() / (2.0 * h);
}

struct PassResult {
    double tau_li = 0.0;
    double tau_hol = 0.0;
    std::array<int, 3> permutation{0, 1, 2};
    int circuits = 1;
    int branch = 0;
};

PassResult single_pass(const ModelParams& model, const LoopSpec& loop, int n, BerryMethod method) {
    PassResult out;

    // First circuit fixes the holonomy permutation.
    PathTrace trace = track_along_path(model, circle_points(loop, n, 1));
    out.permutation = trace.permutation;
    bool identity = true;
    for (int i = 0; i < trace.dim; ++i)
        if (trace.permutation[i] != i) identity = false;
    out.circuits = identity ? 1 : 2;

    int branch = 0;
    if (!identity) {
        branch = 0;
        while (branch < trace.dim && trace.permutation[branch] == branch) ++branch;
    }
    out.branch = branch;

    if (!identity) {
        trace = track_along_path(model, circle_points(loop, n, 2));
        bool closed_identity = true;
        for (int i = 0; i < trace.dim; ++i)
            if (trace.permutation[i] != i) closed_identity = false;
        if (!closed_identity) {
            throw NumericalError("berry_phase: branch permutation did not close in two circuits");
        }
    }

    const GaugeSmoothed gs = gauge_smooth(trace, branch);
    if (!gs.theta_valid) {
        // Transported state has no E-plane weight anywhere: trivial phase.
        return out;
    }
    const std::size_t n_total = gs.trace.points.size();  // n*circuits + 1

    if (method != BerryMethod::line_integral) {
        // Discrete holonomy: per-segment biorthogonal overlaps of the
        // single-valued frames, dual vectors carrying the inverse phase:
        //   <v~_s,j | v_s,j+1> = exp(i (chi_{j+1} - chi_j)) v_j^T v_{j+1}.
        double sum = 0.0;
        for (std::size_t j = 0; j + 1 < n_total; ++j) {
            cdouble o{};
            for (int r = 0; r < gs.trace.dim; ++r) {
                o += trace.branch_vectors[j](r, branch) * trace.branch_vectors[j + 1](r, branch);
            }
            o *= std::polar(1.0, gs.chi[j + 1] - gs.chi[j]);
            sum -= std::arg(o);
        }
        cdouble closure{};
        for (int r = 0; r < gs.trace.dim; ++r) {
            closure += trace.branch_vectors[n_total - 1](r, branch) *
                       trace.branch_vectors[0](r, branch);
        }
        closure *= std::polar(1.0, gs.chi[0] - gs.chi[n_total - 1]);
        if (closure.real() < 0.0) {
            throw NumericalError("berry_phase: smoothed frame failed to close single-valued");
        }
        sum -= std::arg(closure);
        out.tau_hol = sum / out.circuits;
    }

    if (method != BerryMethod::holonomy) {
        // Line integral of the single-valued diagonal coupling:
        // tau = 1/2 contour-integral of d(Re theta)/ds. A loop that swaps
        // branches only closes after two circuits, so integrate the full
        // closed path and divide by the circuit count.
        const double ds = kTwoPi * loop.radius / n;
        const double h = std::min(0.25 * ds, 1e-4);
        double sum = 0.0;
        for (std::size_t j = 0; j + 1 < n_total; ++j) {
            sum += tangential_dtheta(model, gs, j, h, branch) * ds;
        }
        out.tau_li = 0.5 * sum / out.circuits;
    }
    return out;
}

}  // namespace

BerryResult berry_phase(const ModelParams& model, const LoopSpec& loop, BerryMethod method,
                        const std::vector<DegeneracyPoint>& known, double convergence_tol) {
    if (!(convergence_tol > 0.0)) throw DomainError("berry_phase: tolerance must be positive");
    if (loop.n_points < 16) throw DomainError("berry_phase: n_points must be at least 16");
    if (!(loop.radius > 0.0) || !std::isfinite(loop.radius)) {
        throw DomainError("berry_phase: radius must be positive");
    }
    for (const auto& d : known) {
        const double center_dist = distance(loop.center, d.coords);
        if (std::abs(center_dist - loop.radius) < 1e-4) {
            throw InvalidLoopError("berry_phase: loop passes within 1e-4 of a degeneracy");
        }
    }

    BerryResult result;
    result.branch = 0;

    // The overlap product converges first order in the segment length, so
    // the reported holonomy value is the Richardson pair 2 tau(2n) - tau(n);
    // the line integral is compared between successive refinements directly.
    double prev_li = 0.0, prev_hol_raw = 0.0, prev_hol_extrap = 0.0;
    bool have_prev = false, have_extrap = false;
    int n = std::max(16, loop.n_points);
    const int n_cap = 1 << 17;
    for (; n <= n_cap; n *= 2) {
        PassResult pass;
        try {
            pass = single_pass(model, loop, n, method);
        } catch (const TrackingError&) {
            have_prev = false;
            have_extrap = false;
            continue;  // refine the discretization and retry
        }
        result.permutation = pass.permutation;
        result.circuits = pass.circuits;
        result.branch = pass.branch;
        result.n_points_used = n;

        const double li = pass.tau_li;
        const bool need_hol = method != BerryMethod::line_integral;
        double hol_extrap = 0.0;
        if (need_hol && have_prev) {
            hol_extrap = 2.0 * pass.tau_hol - prev_hol_raw;
        }
        if (have_prev) {
            const bool li_ok =
                (method == BerryMethod::holonomy) || std::abs(li - prev_li) < convergence_tol;
            const bool hol_ok =
                !need_hol || (have_extrap && std::abs(hol_extrap - prev_hol_extrap) < convergence_tol);
            if (li_ok && hol_ok) {
                result.converged = true;
                result.tau_signed = (method == BerryMethod::holonomy) ? hol_extrap : li;
                result.tau = std::abs(result.tau_signed);
                result.method_spread =
                    (method == BerryMethod::both) ? std::abs(li - hol_extrap) : 0.0;
                return result;
            }
        }
        if (need_hol && have_prev) {
            prev_hol_extrap = hol_extrap;
            have_extrap = true;
        }
        prev_li = li;
        prev_hol_raw = pass.tau_hol;
        have_prev = true;
    }
    throw InvalidLoopError("berry_phase: loop integral did not converge; the loop passes "
                           "through or too close to a degeneracy");
}

}  // namespace vibronic
