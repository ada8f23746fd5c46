#include "vibronic/nac.hpp"

#include <cmath>
#include <limits>

#include "vibronic/diabatic.hpp"

namespace vibronic {

namespace detail {

cdouble theta_hat_increment(cdouble ex0, cdouble ey0, cdouble ex1, cdouble ey1) {
    // tan((t1 - t0)/2) = (ey1 ex0 - ex1 ey0) / (ex1 ex0 + ey1 ey0)
    // with tan(t/2) = ey/ex; polynomial in the components, so poles of the
    // individual half-angle tangents cancel.
    const cdouble num = ey1 * ex0 - ex1 * ey0;
    const cdouble den = ex1 * ex0 + ey1 * ey0;
    if (std::abs(den) == 0.0) {
        return cdouble(3.14159265358979323846, 0.0);
    }
    return 2.0 * std::atan(num / den);
}

}  // namespace detail

namespace {

struct LocalFrame {
    NuclearCoords q;
    std::array<cdouble, 3> values{};
    Eigen::Matrix3cd vectors = Eigen::Matrix3cd::Zero();
    cdouble theta{};
    bool theta_ok = true;
};

std::pair<cdouble, cdouble> e_components(const Eigen::Matrix3cd& t, int dim, int branch) {
    if (dim == 2) return {t(0, branch), t(1, branch)};
    return {t(1, branch), t(2, branch)};
}

LocalFrame canonical_frame(const ModelParams& model, const NuclearCoords& q, int branch) {
    const Eigensystem es = eig_complex_symmetric(build_diabatic(model, q));
    if (es.any_coalesced) {
        throw NumericalError("nac: frame requested at a coalescence point");
    }
    LocalFrame f;
    f.q = q;
    f.values = es.values;
    f.vectors = es.vectors;
    const auto [ex, ey] = e_components(f.vectors, model_dim(model), branch);
    const double enorm = std::norm(ex) + std::norm(ey);
    if (enorm < 1e-20) {
        f.theta_ok = false;
        f.theta = 0.0;
    } else {
        f.theta = (std::abs(ex) == 0.0) ? cdouble(3.14159265358979323846, 0.0)
                                        : 2.0 * std::atan(ey / ex);
    }
    return f;
}

LocalFrame matched_frame(const ModelParams& model, const NuclearCoords& q, const LocalFrame& ref,
                         int branch) {
    const int dim = model_dim(model);
    const Eigensystem es = eig_complex_symmetric(build_diabatic(model, q));
    if (es.any_coalesced) {
        throw NumericalError("nac: stencil point sits on a coalescence");
    }
    const auto a = detail::assign_branches(ref.vectors, es.vectors, dim);
    if (a.min_normalized_overlap <= 0.5) {
        throw TrackingError("nac: ambiguous frame matching; reduce the step", 0);
    }
    LocalFrame f;
    f.q = q;
    for (int i = 0; i < dim; ++i) {
        Eigen::Vector3cd w = es.vectors.col(a.perm[i]);
        cdouble overlap{};
        for (int r = 0; r < dim; ++r) overlap += ref.vectors(r, i) * w(r);
        if (overlap.real() < 0.0) w = -w;
        f.vectors.col(i) = w;
        f.values[i] = es.values[a.perm[i]];
    }
    f.theta_ok = ref.theta_ok;
    if (f.theta_ok) {
        const auto [ex0, ey0] = e_components(ref.vectors, dim, branch);
        const auto [ex1, ey1] = e_components(f.vectors, dim, branch);
        if (std::norm(ex1) + std::norm(ey1) < 1e-20) {
            f.theta_ok = false;
            f.theta = ref.theta;
        } else {
            f.theta = ref.theta + detail::theta_hat_increment(ex0, ey0, ex1, ey1);
        }
    }
    return f;
}

// Phase factor of the single-valued gauge relative to the reference point.
cdouble sv_phase(const LocalFrame& f, const LocalFrame& ref) {
    if (!f.theta_ok || !ref.theta_ok) return 1.0;
    const double chi = -0.5 * (f.theta.real() - ref.theta.real());
    return std::polar(1.0, chi);
}

NacField nac_from_center(const ModelParams& model, const LocalFrame& center, double step,
                         NacGauge gauge) {
    const int dim = model_dim(model);
    NacField f;
    f.dim = dim;
    f.gauge = gauge;

    const auto stencil_pair = [&](double dx, double dy) {
        const NuclearCoords qp = NuclearCoords::from_cartesian(center.q.qx + dx, center.q.qy + dy);
        const NuclearCoords qm = NuclearCoords::from_cartesian(center.q.qx - dx, center.q.qy - dy);
        LocalFrame fp = matched_frame(model, qp, center, 0);
        LocalFrame fm = matched_frame(model, qm, center, 0);
        if (gauge == NacGauge::single_valued) {
            const cdouble php = sv_phase(fp, center);
            const cdouble phm = sv_phase(fm, center);
            fp.vectors.col(0) *= php;
            fp.vectors.col(1) *= php;
            fm.vectors.col(0) *= phm;
            fm.vectors.col(1) *= phm;
        }
        const double h = std::hypot(dx, dy);
        const Eigen::Matrix3cd d = (fp.vectors - fm.vectors) / (2.0 * h);
        return Eigen::Matrix3cd(center.vectors.transpose() * d);
    };

    f.fx = stencil_pair(step, 0.0);
    f.fy = stencil_pair(0.0, step);
    if (dim == 2) {
        f.fx.row(2).setZero();
        f.fx.col(2).setZero();
        f.fy.row(2).setZero();
        f.fy.col(2).setZero();
    }
    return f;
}

}  // namespace

std::pair<cdouble, cdouble> nac_polar_entry(const NacField& f, int n, int m, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    const cdouble fr = f.fx(n, m) * c + f.fy(n, m) * s;
    const cdouble fp = -f.fx(n, m) * s + f.fy(n, m) * c;
    return {fr, fp};
}

JtNac analytic_jt_nac(const JtParams& p, const NuclearCoords& q) {
    p.validate();
    JtNac out;
    const double rho = q.rho, phi = q.phi;
    const cdouble denom =
        p.k * p.k + p.g * p.g * rho * rho + 2.0 * p.k * p.g * rho * std::cos(3.0 * phi);
    const double scale = std::norm(p.k) + std::norm(p.g) * rho * rho;
    if (rho == 0.0 || std::abs(denom) < 1e-14 * std::max(scale, 1e-300)) {
        out.pole = true;
    }
    const cdouble inf(std::numeric_limits<double>::infinity(), 0.0);
    if (std::abs(denom) == 0.0) {
        out.grad_theta_rho = inf;
        out.grad_theta_phi = inf;
        return out;
    }
    out.grad_theta_rho = -p.k * p.g * std::sin(3.0 * phi) / denom;
    const cdouble ang =
        p.k * p.k - 2.0 * p.g * p.g * rho * rho - p.k * p.g * rho * std::cos(3.0 * phi);
    out.grad_theta_phi = (rho == 0.0) ? inf : ang / (rho * denom);

    out.f12_rho = 0.5 * out.grad_theta_rho;
    out.f12_phi = 0.5 * out.grad_theta_phi;
    out.f_diag_rho = cdouble(0.0, -0.5 * out.grad_theta_rho.real());
    out.f_diag_phi = cdouble(0.0, -0.5 * out.grad_theta_phi.real());
    return out;
}

NacField numeric_nac(const ModelParams& model, const NuclearCoords& q, double step,
                     NacGauge gauge, bool richardson) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw DomainError("numeric_nac: step must be positive");
    }
    const LocalFrame center = canonical_frame(model, q, 0);
    NacField f = nac_from_center(model, center, step, gauge);
    if (richardson) {
        const NacField half = nac_from_center(model, center, 0.5 * step, gauge);
        f.fx = (4.0 * half.fx - f.fx) / 3.0;
        f.fy = (4.0 * half.fy - f.fy) / 3.0;
    }
    return f;
}

GaugeSmoothed gauge_smooth(const PathTrace& trace, int branch) {
    GaugeSmoothed out;
    out.trace = trace;
    const std::size_t n = trace.points.size();
    out.chi.assign(n, 0.0);
    out.theta_hat.assign(n, cdouble{});
    const int dim = trace.dim;

    if (branch < 0) {
        // Pick the tracked branch with the largest minimum E-plane weight.
        double best = -1.0;
        branch = 0;
        for (int b = 0; b < dim; ++b) {
            double worst = 1e300;
            for (const auto& t : trace.branch_vectors) {
                const auto [ex, ey] = e_components(t, dim, b);
                worst = std::min(worst, std::norm(ex) + std::norm(ey));
            }
            if (worst > best) { best = worst; branch = b; }
        }
    }
    out.theta_branch = branch;

    // The phase is applied to the winding E-pair only; spectator branches
    // (the A state in the 3x3 model) are already single-valued and must not
    // pick up the half-angle winding.
    int partner = (branch == 0) ? 1 : 0;
    if (dim == 3) {
        double best_partner = -1.0;
        for (int b = 0; b < dim; ++b) {
            if (b == branch) continue;
            double worst = 1e300;
            for (const auto& t : trace.branch_vectors) {
                const auto [ex, ey] = e_components(t, dim, b);
                worst = std::min(worst, std::norm(ex) + std::norm(ey));
            }
            if (worst > best_partner) { best_partner = worst; partner = b; }
        }
    }
    out.phased.fill(false);
    out.phased[branch] = true;
    out.phased[partner] = true;

    // Accumulate the E-plane angle along the (already sign-smoothed) frames.
    {
        const auto [ex, ey] = e_components(trace.branch_vectors.front(), dim, branch);
        if (std::norm(ex) + std::norm(ey) < 1e-20) {
            out.theta_valid = false;
        } else {
            out.theta_hat[0] = (std::abs(ex) == 0.0) ? cdouble(3.14159265358979323846, 0.0)
                                                     : 2.0 * std::atan(ey / ex);
        }
    }
    for (std::size_t j = 1; j < n && out.theta_valid; ++j) {
        const auto [ex0, ey0] = e_components(trace.branch_vectors[j - 1], dim, branch);
        const auto [ex1, ey1] = e_components(trace.branch_vectors[j], dim, branch);
        if (std::norm(ex1) + std::norm(ey1) < 1e-20) {
            out.theta_valid = false;
            break;
        }
        out.theta_hat[j] = out.theta_hat[j - 1] + detail::theta_hat_increment(ex0, ey0, ex1, ey1);
    }
    if (!out.theta_valid) return out;

    for (std::size_t j = 0; j < n; ++j) {
        out.chi[j] = -0.5 * (out.theta_hat[j].real() - out.theta_hat[0].real());
        const cdouble ph = std::polar(1.0, out.chi[j]);
        for (int b = 0; b < dim; ++b) {
            if (out.phased[b]) out.trace.branch_vectors[j].col(b) *= ph;
        }
    }
    return out;
}

LambdaTerms lambda_terms(const ModelParams& model, const NuclearCoords& q, double step) {
    const int dim = model_dim(model);
    LambdaTerms out;
    out.dim = dim;

    const LocalFrame center = canonical_frame(model, q, 0);
    const NacField f0 = nac_from_center(model, center, step, NacGauge::single_valued);
    out.ff = f0.fx * f0.fx + f0.fy * f0.fy;

    // Divergence by central differences of the coupling field, evaluated in
    // frames matched to the central one so branch signs and the gauge phase
    // reference stay consistent across the outer stencil.
    const auto f_at = [&](double dx, double dy) {
        const NuclearCoords qo = NuclearCoords::from_cartesian(q.qx + dx, q.qy + dy);
        const LocalFrame ref = matched_frame(model, qo, center, 0);
        return nac_from_center(model, ref, step, NacGauge::single_valued);
    };
    const NacField fxp = f_at(step, 0.0);
    const NacField fxm = f_at(-step, 0.0);
    const NacField fyp = f_at(0.0, step);
    const NacField fym = f_at(0.0, -step);
    out.div_f = (fxp.fx - fxm.fx) / (2.0 * step) + (fyp.fy - fym.fy) / (2.0 * step);
    return out;
}

}  // namespace vibronic
