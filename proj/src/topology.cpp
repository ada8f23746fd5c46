#include "vibronic/topology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>

#include "vibronic/adiabatic.hpp"
#include "vibronic/diabatic.hpp"
#include "vibronic/path_trace.hpp"

namespace vibronic {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double fold_2pi(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w;
}

}  // namespace

double jt_critical_radius(const JtParams& p) {
    p.validate();
    if (std::abs(p.g) == 0.0) {
        throw DomainError(
            "jt_critical_radius: g = 0 (linear model) has no finite-radius degeneracies");
    }
    return std::abs(p.k) / std::abs(p.g);
}

std::vector<double> jt_seam_angles(const JtParams& p, double rho) {
    p.validate();
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw DomainError("jt_seam_angles: rho must be positive and finite");
    }
    // Seams sit where Im[(V1 - V2)^2] = 0, i.e.
    //   Im(k^2) + Im(g^2) rho^2 + 2 rho cos(3 phi) Im(k g) = 0.
    const double num = p.k.real() * p.k.imag() + p.g.real() * p.g.imag() * rho * rho;
    const double den = p.k.real() * p.g.imag() + p.g.real() * p.k.imag();  // Im(k g)
    const double scale = std::abs(p.k) * std::abs(p.g);
    if (std::abs(den) <= 1e-15 * std::max(scale, 1e-300)) {
        throw DomainError("jt_seam_angles: Im(k g) = 0, seam condition degenerates");
    }
    double rhs = -num / (rho * den);
    if (std::abs(rhs) > 1.0 + 1e-9) return {};
    rhs = std::clamp(rhs, -1.0, 1.0);

    const double base = std::acos(rhs);  // in [0, pi]
    std::vector<double> angles;
    angles.reserve(6);
    for (int n = 0; n < 3; ++n) {
        angles.push_back(fold_2pi((base + kTwoPi * n) / 3.0));
        angles.push_back(fold_2pi((-base + kTwoPi * (n + 1)) / 3.0));
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

namespace detail {

PairAnalysis model_pair_analysis(const ModelParams& model, long double rho, long double phi) {
    if (const auto* jt = std::get_if<JtParams>(&model)) {
        const Matrix2cld m = jt_entries_deviatoric<long double>(*jt, rho, phi);
        return analyze_pair_2x2(m);
    }
    const auto& p = std::get<PjtParams>(model);
    const Matrix3cld m = pjt_entries_deviatoric<long double>(p, rho, phi);
    return analyze_closest_pair(m);
}

cdouble lower_pair_gap_squared(const ModelParams& model, const NuclearCoords& q) {
    const Eigensystem es = eig_complex_symmetric(build_diabatic(model, q));
    const cdouble d = es.values[1] - es.values[0];
    return d * d;
}

}  // namespace detail

namespace {

// Branch indices of the two lowest surfaces; the searches below concern that
// pair throughout the validity region.
std::pair<int, int> lower_pair() { return {0, 1}; }

struct Candidate {
    long double rho;
    long double phi;
};

// Newton refinement of the complex pair discriminant in cartesian
// coordinates, carried out in extended precision. Returns the converged
// point or nothing when the iteration fails to reach a true degeneracy.
std::optional<Candidate> polish_degeneracy(const ModelParams& model, const Candidate& start) {
    const auto disc_at = [&](long double qx, long double qy) {
        const long double rho = std::hypot(qx, qy);
        const long double phi = (rho == 0.0L) ? 0.0L : std::atan2(qy, qx);
        return detail::model_pair_analysis(model, rho, phi).pair_discriminant;
    };

    long double qx = start.rho * std::cos(start.phi);
    long double qy = start.rho * std::sin(start.phi);
    const long double h = 1e-8L;
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
        const cldouble f = disc_at(qx, qy);
        const cldouble fx = (disc_at(qx + h, qy) - disc_at(qx - h, qy)) / (2.0L * h);
        const cldouble fy = (disc_at(qx, qy + h) - disc_at(qx, qy - h)) / (2.0L * h);
        // 2x2 real system [Re fx, Re fy; Im fx, Im fy] d = -[Re f; Im f].
        const long double a = fx.real(), b = fy.real();
        const long double c = fx.imag(), d = fy.imag();
        const long double det = a * d - b * c;
        if (std::abs(det) < 1e-60L) break;
        long double dx = (-f.real() * d + f.imag() * b) / det;
        long double dy = (-f.imag() * a + f.real() * c) / det;
        const long double step = std::hypot(dx, dy);
        const long double cap = 5e-3L;  // keep Newton inside the basin
        if (step > cap) {
            dx *= cap / step;
            dy *= cap / step;
        }
        qx += dx;
        qy += dy;
        if (!std::isfinite(static_cast<double>(qx)) || !std::isfinite(static_cast<double>(qy))) {
            return std::nullopt;
        }
        if (std::hypot(qx, qy) > 2.0L) return std::nullopt;
        if (step < 1e-17L) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        // Accept anyway if the discriminant already sits at the noise floor.
        if (std::abs(disc_at(qx, qy)) > 1e-22L) return std::nullopt;
    }
    // Keep the converged angle exactly as produced (atan2 range); folding
    // into [0, 2pi) here would perturb the point by an ulp of 2 pi, which is
    // enough to defeat the extended-precision classification.
    const long double rho = std::hypot(qx, qy);
    const long double phi = (rho == 0.0L) ? 0.0L : std::atan2(qy, qx);
    return Candidate{rho, phi};
}

bool phi_in_range(double phi, const PolarRegion& region) {
    if (region.phi_max - region.phi_min >= kTwoPi - 1e-12) return true;
    const double lo = fold_2pi(region.phi_min);
    const double span = region.phi_max - region.phi_min;
    const double rel = fold_2pi(phi - lo);
    return rel <= span + 1e-9;
}

}  // namespace

namespace {

void require_full_plane_model(const ModelParams& model, const char* who) {
    if (const auto* p = std::get_if<PjtParams>(&model)) {
        if (p->order == 3) {
            throw UnsupportedRegionError(std::string(who) +
                                         ": third-order terms are defined only on the Qy = 0 "
                                         "slice; 2D searches need the second-order model");
        }
    }
}

}  // namespace

std::vector<DegeneracyPoint> find_exceptional_points(const ModelParams& model,
                                                     const PolarRegion& region,
                                                     const TopologyOptions& opts) {
    require_full_plane_model(model, "find_exceptional_points");
    if (!(region.rho_max > region.rho_min) || region.rho_min < 0.0) {
        throw DomainError("find_exceptional_points: invalid region");
    }
    const int dim = model_dim(model);

    std::vector<DegeneracyPoint> found;

    // The origin is a polar-coordinate singularity of the search and a
    // symmetry-required degeneracy of the models; handle it directly.
    if (region.rho_min <= 1e-9) {
        const Eigensystem es =
            eig_complex_symmetric(build_diabatic(model, NuclearCoords::from_cartesian(0.0, 0.0)));
        int bi = -1, bj = -1;
        double gap = 1e300;
        for (int i = 0; i < dim; ++i) {
            for (int j = i + 1; j < dim; ++j) {
                const double g = std::abs(es.values[i] - es.values[j]);
                if (g < gap) { gap = g; bi = i; bj = j; }
            }
        }
        if (gap < 1e-10) {
            DegeneracyPoint p;
            p.coords = NuclearCoords::from_cartesian(0.0, 0.0);
            p.branches = {bi, bj};
            p.residual = gap;
            p.rigidity = std::min(es.rigidity[bi], es.rigidity[bj]);
            p.kind = (p.rigidity < kCoalescenceRigidity) ? DegeneracyKind::exceptional_point
                                                         : DegeneracyKind::conical_intersection;
            found.push_back(p);
        }
    }

    // Coarse polar scan of the gap between the closest pair.
    const double rho_lo = std::max(region.rho_min, 2.0 * opts.grid_d_rho);
    const int n_rho = std::max(
        3, static_cast<int>(std::ceil((region.rho_max - rho_lo) / opts.grid_d_rho)) + 1);
    const double phi_span = std::min(region.phi_max - region.phi_min, kTwoPi);
    const bool full_circle = phi_span >= kTwoPi - 1e-12;
    const int n_phi = std::max(8, static_cast<int>(std::ceil(phi_span / opts.grid_d_phi)));
    const int phi_cols = full_circle ? n_phi : n_phi + 1;

    std::vector<double> gap(static_cast<std::size_t>(n_rho) * phi_cols);
    const auto gap_at = [&](int ir, int ip) -> double& {
        return gap[static_cast<std::size_t>(ir) * phi_cols + ip];
    };
    std::vector<double> rhos(n_rho), phis(phi_cols);
    for (int ir = 0; ir < n_rho; ++ir) {
        rhos[ir] = rho_lo + ir * (region.rho_max - rho_lo) / (n_rho - 1);
    }
    for (int ip = 0; ip < phi_cols; ++ip) {
        phis[ip] = region.phi_min + ip * phi_span / n_phi;
    }
    for (int ir = 0; ir < n_rho; ++ir) {
        for (int ip = 0; ip < phi_cols; ++ip) {
            gap_at(ir, ip) =
                static_cast<double>(detail::model_pair_analysis(model, rhos[ir], phis[ip]).gap);
        }
    }

    // Local minima of the gap seed the Newton polish.
    std::vector<Candidate> candidates;
    for (int ir = 0; ir < n_rho; ++ir) {
        for (int ip = 0; ip < phi_cols; ++ip) {
            const double g0 = gap_at(ir, ip);
            if (g0 > 1e-2) continue;
            bool is_min = true;
            for (int dr = -1; dr <= 1 && is_min; ++dr) {
                for (int dp = -1; dp <= 1; ++dp) {
                    if (dr == 0 && dp == 0) continue;
                    const int jr = ir + dr;
                    int jp = ip + dp;
                    if (jr < 0 || jr >= n_rho) continue;
                    if (full_circle) {
                        jp = (jp + n_phi) % n_phi;
                    } else if (jp < 0 || jp >= phi_cols) {
                        continue;
                    }
                    if (gap_at(jr, jp) < g0) { is_min = false; break; }
                }
            }
            if (is_min) candidates.push_back({rhos[ir], phis[ip]});
        }
    }

    for (const auto& cand : candidates) {
        const auto refined = polish_degeneracy(model, cand);
        if (!refined) continue;
        const double rho = static_cast<double>(refined->rho);
        const double phi = fold_2pi(static_cast<double>(refined->phi));
        if (rho < region.rho_min - 1e-9 || rho > region.rho_max + 1e-9) continue;
        if (!phi_in_range(phi, region)) continue;
        if (rho < 1e-7) continue;  // origin handled above

        const auto pa = detail::model_pair_analysis(model, refined->rho, refined->phi);
        const double rigidity = static_cast<double>(std::max(pa.rigidity_a, pa.rigidity_b));
        const double residual = static_cast<double>(pa.gap);

        DegeneracyPoint p;
        p.coords = NuclearCoords::from_polar(rho, phi);
        p.branches = lower_pair();
        p.residual = residual;
        p.rigidity = rigidity;
        p.extrapolated = rho > opts.validity_rho;
        if (rigidity < kCoalescenceRigidity && residual < 1e-9) {
            p.kind = DegeneracyKind::exceptional_point;
        } else if (rigidity > 0.99 && residual < 1e-10) {
            p.kind = DegeneracyKind::conical_intersection;
        } else {
            continue;  // gap minimum that is not a true degeneracy
        }
        found.push_back(p);
    }

    std::sort(found.begin(), found.end(), [](const DegeneracyPoint& a, const DegeneracyPoint& b) {
        if (a.coords.rho != b.coords.rho) return a.coords.rho < b.coords.rho;
        return a.coords.phi < b.coords.phi;
    });
    std::vector<DegeneracyPoint> unique;
    for (const auto& p : found) {
        bool dup = false;
        for (const auto& u : unique) {
            if (distance(p.coords, u.coords) < opts.merge_tol) { dup = true; break; }
        }
        if (!dup) unique.push_back(p);
    }
    return unique;
}

namespace {

struct SeamNode {
    double rho;
    double phi;
    cdouble gap2;
};

// Transverse relaxation of Im[(V1-V2)^2] = 0 along the local gradient.
SeamNode polish_seam_point(const ModelParams& model, double rho, double phi, double h) {
    const auto s_at = [&](double r, double p) {
        return detail::lower_pair_gap_squared(model, NuclearCoords::from_polar(r, p));
    };
    double r = rho, p = phi;
    for (int it = 0; it < 60; ++it) {
        const cdouble s0 = s_at(r, p);
        const double w0 = s0.imag();
        if (std::abs(w0) < 1e-18) return {r, p, s0};
        const double wr = (s_at(r + h, p).imag() - s_at(r - h, p).imag()) / (2.0 * h);
        const double wp = (s_at(r, p + h).imag() - s_at(r, p - h).imag()) / (2.0 * h);
        const double g2 = wr * wr + wp * wp;
        if (g2 < 1e-300) break;
        double dr = -w0 * wr / g2;
        double dp = -w0 * wp / g2;
        const double cap = 10.0 * h;
        const double len = std::hypot(dr, dp);
        if (len > cap) {
            dr *= cap / len;
            dp *= cap / len;
        }
        r += dr;
        p += dp;
        if (r < 1e-6) r = 1e-6;
    }
    return {r, p, s_at(r, p)};
}

}  // namespace

SeamScan trace_seams(const ModelParams& model, const PolarRegion& region,
                     const TopologyOptions& opts) {
    require_full_plane_model(model, "trace_seams");
    SeamScan scan;

    // Bound-state limit: Im(V1 - V2)^2 vanishes identically and the seam
    // condition is degenerate over the whole plane.
    bool all_real = true;
    if (const auto* jt = std::get_if<JtParams>(&model)) {
        all_real = jt->eps_E.imag() == 0.0 && jt->omega.imag() == 0.0 && jt->k.imag() == 0.0 &&
                   jt->g.imag() == 0.0;
    } else {
        const auto& p = std::get<PjtParams>(model);
        all_real = p.eps_E.imag() == 0.0 && p.eps_A.imag() == 0.0 && p.omega.imag() == 0.0 &&
                   p.k.imag() == 0.0 && p.g.imag() == 0.0 && p.alpha.imag() == 0.0;
        if (p.order == 3) {
            all_real =
                all_real && p.beta.imag() == 0.0 && p.nu.imag() == 0.0 && p.mu.imag() == 0.0;
        }
    }
    if (all_real) {
        scan.im_degenerate_everywhere = true;
        return scan;
    }

    const double rho_lo = std::max(region.rho_min, 1e-3);
    const double d_rho = std::max(opts.grid_d_rho, 1e-4);
    const double d_phi = std::max(opts.grid_d_phi, 1e-4);
    const int n_rho =
        std::max(3, static_cast<int>(std::ceil((region.rho_max - rho_lo) / d_rho)) + 1);
    const double phi_span = std::min(region.phi_max - region.phi_min, kTwoPi);
    const bool full_circle = phi_span >= kTwoPi - 1e-12;
    const int n_phi = std::max(8, static_cast<int>(std::ceil(phi_span / d_phi)));
    const int phi_cols = n_phi + 1;  // duplicate the wrap column for chaining

    std::vector<double> rhos(n_rho), phis(phi_cols);
    for (int ir = 0; ir < n_rho; ++ir) {
        rhos[ir] = rho_lo + ir * (region.rho_max - rho_lo) / (n_rho - 1);
    }
    for (int ip = 0; ip < phi_cols; ++ip) {
        phis[ip] = region.phi_min + ip * phi_span / n_phi;
    }

    std::vector<double> w(static_cast<std::size_t>(n_rho) * phi_cols);
    for (int ir = 0; ir < n_rho; ++ir) {
        for (int ip = 0; ip < phi_cols; ++ip) {
            const int ip_eval = (full_circle && ip == n_phi) ? 0 : ip;
            w[static_cast<std::size_t>(ir) * phi_cols + ip] =
                detail::lower_pair_gap_squared(model,
                                               NuclearCoords::from_polar(rhos[ir], phis[ip_eval]))
                    .imag();
        }
    }
    const auto w_at = [&](int ir, int ip) {
        return w[static_cast<std::size_t>(ir) * phi_cols + ip];
    };

    // Marching squares on the seam indicator: zero crossings on cell edges,
    // chained through shared edges into polylines.
    struct EdgeKey {
        int ir, ip;
        bool radial;  // true: to (ir+1, ip); false: to (ir, ip+1)
        bool operator<(const EdgeKey& o) const {
            return std::tie(ir, ip, radial) < std::tie(o.ir, o.ip, o.radial);
        }
    };
    std::map<EdgeKey, std::pair<double, double>> edge_points;  // (rho, phi)
    const auto edge_zero = [&](const EdgeKey& e) -> std::optional<std::pair<double, double>> {
        const auto it = edge_points.find(e);
        if (it != edge_points.end()) return it->second;
        const double w0 = w_at(e.ir, e.ip);
        const double w1 = e.radial ? w_at(e.ir + 1, e.ip) : w_at(e.ir, e.ip + 1);
        if (!((w0 <= 0.0 && w1 > 0.0) || (w0 > 0.0 && w1 <= 0.0))) return std::nullopt;
        const double t = w0 / (w0 - w1);
        std::pair<double, double> pt;
        if (e.radial) {
            pt = {rhos[e.ir] + t * (rhos[e.ir + 1] - rhos[e.ir]), phis[e.ip]};
        } else {
            pt = {rhos[e.ir], phis[e.ip] + t * (phis[e.ip + 1] - phis[e.ip])};
        }
        edge_points[e] = pt;
        return pt;
    };

    std::map<EdgeKey, std::vector<EdgeKey>> adjacency;
    const auto connect = [&](const EdgeKey& a, const EdgeKey& b) {
        adjacency[a].push_back(b);
        adjacency[b].push_back(a);
    };
    for (int ir = 0; ir + 1 < n_rho; ++ir) {
        for (int ip = 0; ip + 1 < phi_cols; ++ip) {
            const EdgeKey bottom{ir, ip, false};
            const EdgeKey top{ir + 1, ip, false};
            const EdgeKey left{ir, ip, true};
            const EdgeKey right{ir, ip + 1, true};
            std::vector<EdgeKey> hits;
            for (const auto& e : {bottom, right, top, left}) {
                if (edge_zero(e)) hits.push_back(e);
            }
            if (hits.size() == 2) {
                connect(hits[0], hits[1]);
            } else if (hits.size() == 4) {
                // Saddle cell: the center value picks the pairing.
                const double wc = 0.25 * (w_at(ir, ip) + w_at(ir + 1, ip) + w_at(ir, ip + 1) +
                                          w_at(ir + 1, ip + 1));
                if ((wc > 0.0) == (w_at(ir, ip) > 0.0)) {
                    connect(bottom, right);
                    connect(top, left);
                } else {
                    connect(bottom, left);
                    connect(top, right);
                }
            }
        }
    }

    std::map<EdgeKey, bool> used;
    std::vector<std::vector<EdgeKey>> chains;
    const auto walk = [&](const EdgeKey& startEdge) {
        std::vector<EdgeKey> chain{startEdge};
        used[startEdge] = true;
        EdgeKey cur = startEdge;
        while (true) {
            bool advanced = false;
            for (const auto& nx : adjacency[cur]) {
                if (!used[nx]) {
                    used[nx] = true;
                    chain.push_back(nx);
                    cur = nx;
                    advanced = true;
                    break;
                }
            }
            if (!advanced) break;
        }
        return chain;
    };
    for (const auto& [edge, nbrs] : adjacency) {
        if (!used[edge] && nbrs.size() == 1) chains.push_back(walk(edge));
    }
    for (const auto& [edge, nbrs] : adjacency) {
        if (!used[edge]) chains.push_back(walk(edge));  // closed loops
    }

    // Polish, classify and split each chain by seam kind.
    const double h = 0.25 * std::min(d_rho, d_phi);
    for (const auto& chain : chains) {
        if (chain.size() < 2) continue;
        SeamCurve cur;
        cur.branches = lower_pair();
        bool have_kind = false;
        for (const auto& e : chain) {
            const auto pt = edge_zero(e);
            if (!pt) continue;
            const SeamNode node = polish_seam_point(model, pt->first, pt->second, h);
            const SeamKind kind = (node.gap2.real() < 0.0) ? SeamKind::re_seam : SeamKind::im_seam;
            if (have_kind && kind != cur.kind) {
                if (cur.points.size() >= 2) scan.curves.push_back(cur);
                cur.points.clear();
            }
            cur.kind = kind;
            have_kind = true;
            cur.points.push_back(NuclearCoords::from_polar(node.rho, fold_2pi(node.phi)));
        }
        if (cur.points.size() >= 2) scan.curves.push_back(cur);
    }
    return scan;
}

SurfaceTable grid_scan(const ModelParams& model, const GridSpec& spec) {
    if (spec.axis_a.n < 1 || spec.axis_b.n < 1) {
        throw DomainError("grid_scan: grid sizes must be positive");
    }
    const int dim = model_dim(model);
    SurfaceTable table;
    table.dim = dim;
    table.spec = spec;
    table.points.reserve(static_cast<std::size_t>(spec.axis_a.n) * spec.axis_b.n);

    const auto coord_at = [&](int ia, int ib) {
        const double a =
            (spec.axis_a.n == 1)
                ? spec.axis_a.lo
                : spec.axis_a.lo + ia * (spec.axis_a.hi - spec.axis_a.lo) / (spec.axis_a.n - 1);
        const double b =
            (spec.axis_b.n == 1)
                ? spec.axis_b.lo
                : spec.axis_b.lo + ib * (spec.axis_b.hi - spec.axis_b.lo) / (spec.axis_b.n - 1);
        return spec.polar ? NuclearCoords::from_polar(a, b) : NuclearCoords::from_cartesian(a, b);
    };

    // Branch labels follow the frame along each inner row; row starts are
    // matched against the previous row so labels stay globally continuous.
    Eigen::Matrix3cd row_start_frame = Eigen::Matrix3cd::Zero();
    bool have_row_start = false;
    for (int ib = 0; ib < spec.axis_b.n; ++ib) {
        Eigen::Matrix3cd prev = Eigen::Matrix3cd::Zero();
        bool have_prev = false;
        for (int ia = 0; ia < spec.axis_a.n; ++ia) {
            const NuclearCoords q = coord_at(ia, ib);
            const Eigensystem es = eig_complex_symmetric(build_diabatic(model, q));

            SurfacePoint sp;
            sp.q = q;
            std::array<int, 3> perm{0, 1, 2};
            const Eigen::Matrix3cd* ref =
                have_prev ? &prev : (have_row_start ? &row_start_frame : nullptr);
            if (ref != nullptr && !es.any_coalesced) {
                const auto a = detail::assign_branches(*ref, es.vectors, dim);
                if (a.min_normalized_overlap > 0.5) perm = a.perm;
            }
            Eigen::Matrix3cd cur = Eigen::Matrix3cd::Zero();
            for (int i = 0; i < dim; ++i) {
                sp.v[i] = es.values[perm[i]];
                cur.col(i) = es.vectors.col(perm[i]);
            }
            double rig = 1.0;
            double gmin = 1e300;
            for (int i = 0; i < dim; ++i) {
                for (int j = i + 1; j < dim; ++j) {
                    const double g = std::abs(es.values[i] - es.values[j]);
                    if (g < gmin) {
                        gmin = g;
                        rig = std::min(es.rigidity[i], es.rigidity[j]);
                    }
                }
            }
            sp.rigidity = rig;
            table.points.push_back(sp);

            prev = cur;
            have_prev = true;
            if (ia == 0) {
                row_start_frame = cur;
                have_row_start = true;
            }
        }
    }
    return table;
}

}  // namespace vibronic
