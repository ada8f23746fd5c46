#include "vibronic/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace vibronic {

namespace detail {

double GaussianStream::uniform() {
    // splitmix64 stream; top 53 bits make a double in (0, 1).
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianStream::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

std::array<cdouble, 3> slice_branch_values(const ModelParams& model, double qx) {
    if (const auto* jt = std::get_if<JtParams>(&model)) {
        const cdouble base = jt->eps_E + 0.5 * jt->omega * qx * qx;
        const cdouble split = jt->k * qx + jt->g * qx * qx;
        return {base + split, base - split, cdouble{}};
    }
    const auto& p = std::get<PjtParams>(model);
    const auto v = analytic_slice_potentials(p, qx);
    return {v.v1, v.v2, v.v3};
}

}  // namespace detail

cdouble assemble_potential(const ResonanceSample& s) {
    if (s.gamma_n < 0.0) {
        throw DomainError("assemble_potential: negative width");
    }
    if (!std::isfinite(s.eps_n) || !std::isfinite(s.gamma_n) || !std::isfinite(s.v_ion)) {
        throw DomainError("assemble_potential: non-finite sample");
    }
    return cdouble(s.v_ion + s.eps_n, -0.5 * s.gamma_n);
}

double bw_time_delay(double e, const std::vector<std::pair<double, double>>& resonances,
                     double bg) {
    double sum = bg;
    for (const auto& [eps, gamma] : resonances) {
        if (!(gamma > 0.0)) {
            throw DomainError("bw_time_delay: width must be positive");
        }
        const double half = 0.5 * gamma;
        const double de = e - eps;
        sum += half / (de * de + half * half);
    }
    return sum;
}

namespace {

double lorentzian(double e, double eps, double gamma) {
    const double half = 0.5 * gamma;
    const double de = e - eps;
    return half / (de * de + half * half);
}

}  // namespace

BwFitResult fit_time_delay(const TimeDelayCurve& curve, int n_res,
                           const std::vector<std::pair<double, double>>* init) {
    if (n_res < 1) throw DomainError("fit_time_delay: n_res must be at least 1");
    const std::size_t m = curve.energy.size();
    if (curve.ddelta_de.size() != m) {
        throw DomainError("fit_time_delay: energy and value arrays differ in length");
    }
    if (m < static_cast<std::size_t>(3 * n_res + 1)) {
        throw DomainError("fit_time_delay: need at least 3*n_res + 1 points");
    }
    for (std::size_t i = 1; i < m; ++i) {
        if (!(curve.energy[i] > curve.energy[i - 1])) {
            throw DomainError("fit_time_delay: energy grid must be strictly increasing");
        }
    }
    const double e_span = curve.energy.back() - curve.energy.front();

    // Starting point: supplied, or greedy peak picking on the de-backgrounded
    // curve with widths from the peak heights.
    Eigen::VectorXd x(2 * n_res + 1);
    if (init != nullptr) {
        if (static_cast<int>(init->size()) != n_res) {
            throw DomainError("fit_time_delay: init size does not match n_res");
        }
        for (int k = 0; k < n_res; ++k) {
            x(2 * k) = (*init)[k].first;
            x(2 * k + 1) = (*init)[k].second;
        }
        x(2 * n_res) = *std::min_element(curve.ddelta_de.begin(), curve.ddelta_de.end());
    } else {
        const double bg0 = *std::min_element(curve.ddelta_de.begin(), curve.ddelta_de.end());
        std::vector<double> work(curve.ddelta_de);
        for (auto& w : work) w -= bg0;
        for (int k = 0; k < n_res; ++k) {
            const auto it = std::max_element(work.begin(), work.end());
            const std::size_t i = static_cast<std::size_t>(it - work.begin());
            const double peak = std::max(*it, 1e-12);
            double eps = curve.energy[i];
            double gamma = std::min(std::max(2.0 / peak, 1e-6 * e_span), e_span);
            // Nudge coincident picks apart so overlapping resonances split.
            for (int kk = 0; kk < k; ++kk) {
                if (std::abs(eps - x(2 * kk)) < 0.25 * gamma) eps += 0.5 * gamma;
            }
            x(2 * k) = eps;
            x(2 * k + 1) = gamma;
            for (std::size_t jj = 0; jj < m; ++jj) {
                work[jj] -= lorentzian(curve.energy[jj], eps, gamma);
            }
        }
        x(2 * n_res) = bg0;
    }

    const auto residual = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(m);
        for (int k = 0; k < n_res; ++k) {
            if (!(p(2 * k + 1) > 0.0)) {
                r.setConstant(std::nan(""));
                return r;  // vetoed: widths must stay positive
            }
        }
        for (std::size_t i = 0; i < m; ++i) {
            double v = p(2 * n_res);
            for (int k = 0; k < n_res; ++k) {
                v += lorentzian(curve.energy[i], p(2 * k), p(2 * k + 1));
            }
            r(i) = v - curve.ddelta_de[i];
        }
        return r;
    };
    const auto jacobian = [&](const Eigen::VectorXd& p) {
        Eigen::MatrixXd j(m, 2 * n_res + 1);
        for (std::size_t i = 0; i < m; ++i) {
            for (int k = 0; k < n_res; ++k) {
                const double eps = p(2 * k), gamma = p(2 * k + 1);
                const double half = 0.5 * gamma;
                const double de = curve.energy[i] - eps;
                const double den = de * de + half * half;
                j(i, 2 * k) = half * 2.0 * de / (den * den);
                j(i, 2 * k + 1) = 0.5 / den - half * half / (den * den);
            }
            j(i, 2 * n_res) = 1.0;
        }
        return j;
    };

    const LmResult lm = levenberg_marquardt(residual, jacobian, x);

    BwFitResult out;
    out.iterations = lm.iterations;
    out.converged = lm.converged;
    for (int k = 0; k < n_res; ++k) {
        out.resonances.emplace_back(lm.x(2 * k), lm.x(2 * k + 1));
    }
    std::sort(out.resonances.begin(), out.resonances.end());
    out.bg = lm.x(2 * n_res);
    Eigen::VectorXd x_final(2 * n_res + 1);
    for (int k = 0; k < n_res; ++k) {
        x_final(2 * k) = out.resonances[k].first;
        x_final(2 * k + 1) = out.resonances[k].second;
    }
    x_final(2 * n_res) = out.bg;
    out.residual = residual(x_final).squaredNorm();

    for (const auto& [eps, gamma] : out.resonances) {
        if (gamma > 10.0 * e_span) {
            out.converged = false;
            out.notes.push_back("width diverged beyond the sampled window");
        }
        if (eps < curve.energy.front() - e_span || eps > curve.energy.back() + e_span) {
            out.converged = false;
            out.notes.push_back("resonance position left the sampled window");
        }
    }

    const int np = 2 * n_res + 1;
    if (static_cast<int>(m) > np) {
        const double s2 = out.residual / (static_cast<double>(m) - np);
        const Eigen::MatrixXd cov = s2 * lm.jtj.inverse();
        for (int i = 0; i < np; ++i) {
            out.uncertainty.push_back(std::sqrt(std::max(cov(i, i), 0.0)));
        }
        out.notes.push_back("uncertainties are linearized and indicative only");
    }
    return out;
}

namespace {

struct SliceModel {
    int order = 2;

    // Parameter vector layout: interleaved (Re, Im) for
    // eps_E, eps_A, omega, k, g, alpha [, beta, nu, mu].
    static PjtParams unpack(const Eigen::VectorXd& x, int order) {
        PjtParams p;
        p.eps_E = {x(0), x(1)};
        p.eps_A = {x(2), x(3)};
        p.omega = {x(4), x(5)};
        p.k = {x(6), x(7)};
        p.g = {x(8), x(9)};
        p.alpha = {x(10), x(11)};
        p.order = order;
        if (order == 3) {
            p.beta = {x(12), x(13)};
            p.nu = {x(14), x(15)};
            p.mu = {x(16), x(17)};
        }
        return p;
    }

    static Eigen::VectorXd pack(const PjtParams& p) {
        Eigen::VectorXd x(12);
        x << p.eps_E.real(), p.eps_E.imag(), p.eps_A.real(), p.eps_A.imag(), p.omega.real(),
            p.omega.imag(), p.k.real(), p.k.imag(), p.g.real(), p.g.imag(), p.alpha.real(),
            p.alpha.imag();
        if (p.order == 3) {
            x.conservativeResize(18);
            x(12) = p.beta.real();
            x(13) = p.beta.imag();
            x(14) = p.nu.real();
            x(15) = p.nu.imag();
            x(16) = p.mu.real();
            x(17) = p.mu.imag();
        }
        return x;
    }
};

// Branch values and complex parameter derivatives of the slice model.
struct SliceEval {
    std::array<cdouble, 3> v{};
    // d v[branch] / d p for p in the parameter order of SliceModel.
    std::array<std::array<cdouble, 9>, 3> dv{};
};

SliceEval evaluate_slice(const PjtParams& p, double qx) {
    SliceEval out;
    const double q2 = qx * qx, q3 = qx * qx * qx;
    const cdouble split =
        p.k * qx + p.g * q2 + ((p.order == 3) ? p.mu * q3 : cdouble{});
    const cdouble couple = p.alpha * qx + ((p.order == 3) ? p.beta * q2 : cdouble{});
    const cdouble diag3 = (p.order == 3) ? p.nu * q3 : cdouble{};
    const cdouble harm = 0.5 * p.omega * q2;

    const cdouble delta = p.eps_A - p.eps_E - split;
    const cdouble disc = 0.25 * delta * delta + couple * couple;
    const cdouble root = std::sqrt(disc);
    const cdouble mean = 0.5 * (p.eps_E + p.eps_A) + harm + diag3 + 0.5 * split;

    out.v[0] = mean - root;
    out.v[2] = mean + root;
    out.v[1] = p.eps_E + harm + diag3 - split;

    // Complex derivatives; index order eps_E, eps_A, omega, k, g, alpha,
    // beta, nu, mu.
    std::array<cdouble, 9> dmean{}, ddelta{}, dcouple{}, dv2{};
    dmean[0] = 0.5;
    dmean[1] = 0.5;
    dmean[2] = 0.5 * q2;
    dmean[3] = 0.5 * qx;
    dmean[4] = 0.5 * q2;
    ddelta[0] = -1.0;
    ddelta[1] = 1.0;
    ddelta[3] = -qx;
    ddelta[4] = -q2;
    dcouple[5] = qx;
    dv2[0] = 1.0;
    dv2[2] = 0.5 * q2;
    dv2[3] = -qx;
    dv2[4] = -q2;
    if (p.order == 3) {
        dmean[7] = q3;        // nu
        dmean[8] = 0.5 * q3;  // mu
        ddelta[8] = -q3;
        dcouple[6] = q2;  // beta
        dv2[7] = q3;
        dv2[8] = -q3;
    }
    for (int ip = 0; ip < 9; ++ip) {
        cdouble droot{};
        if (std::abs(root) > 1e-300) {
            droot = (0.25 * delta * ddelta[ip] + couple * dcouple[ip]) / root;
        }
        out.dv[0][ip] = dmean[ip] - droot;
        out.dv[2][ip] = dmean[ip] + droot;
        out.dv[1][ip] = dv2[ip];
    }
    return out;
}

// Nearest-model-value resolution of the ambiguous A1 samples.
int resolve_branch(const ResonanceSample& s, const SliceEval& eval) {
    if (s.branch != kBranchAmbiguousA1) return s.branch;
    const cdouble v = assemble_potential(s);
    return (std::abs(v - eval.v[0]) <= std::abs(v - eval.v[2])) ? 1 : 3;
}

PjtParams estimate_slice_start(const std::vector<ResonanceSample>& data, int order) {
    // Moment-based starting point: B2 quadratic gives eps_E and k; the A1
    // pair sum gives eps_A, omega and g; alpha comes from the pair gap.
    std::vector<std::pair<double, cdouble>> b2;
    std::map<double, std::vector<cdouble>> a1;
    for (const auto& s : data) {
        const cdouble v = assemble_potential(s);
        if (s.branch == 2) {
            b2.emplace_back(s.q.qx, v);
        } else {
            a1[s.q.qx].push_back(v);
        }
    }

    const auto quad_fit = [](const std::vector<std::pair<double, cdouble>>& pts) {
        Eigen::MatrixXd a(pts.size(), 3);
        Eigen::VectorXd yr(pts.size()), yi(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            a(i, 0) = 1.0;
            a(i, 1) = pts[i].first;
            a(i, 2) = pts[i].first * pts[i].first;
            yr(i) = pts[i].second.real();
            yi(i) = pts[i].second.imag();
        }
        const Eigen::VectorXd cr = a.colPivHouseholderQr().solve(yr);
        const Eigen::VectorXd ci = a.colPivHouseholderQr().solve(yi);
        return std::array<cdouble, 3>{cdouble(cr(0), ci(0)), cdouble(cr(1), ci(1)),
                                      cdouble(cr(2), ci(2))};
    };

    PjtParams p;
    p.order = order;
    cdouble c2{};
    if (b2.size() >= 3) {
        const auto c = quad_fit(b2);
        p.eps_E = c[0];
        p.k = -c[1];
        c2 = c[2];
    }

    std::vector<std::pair<double, cdouble>> pair_sum;
    std::vector<std::pair<double, double>> w2_over_q2;  // (Re, Im) of W^2/qx^2
    std::vector<std::pair<double, cdouble>> pair_diff2;
    for (const auto& [qx, vals] : a1) {
        if (vals.size() != 2) continue;
        pair_sum.emplace_back(qx, vals[0] + vals[1]);
        pair_diff2.emplace_back(qx, (vals[1] - vals[0]) * (vals[1] - vals[0]));
    }
    if (pair_sum.size() >= 3) {
        const auto b = quad_fit(pair_sum);
        p.eps_A = b[0] - p.eps_E;
        const cdouble omega = (2.0 / 3.0) * (b[2] + c2);
        p.omega = omega;
        p.g = b[2] - omega;
    } else {
        p.eps_A = p.eps_E + cdouble(0.05, 0.0);
    }

    // alpha^2 from (V3 - V1)^2 = Delta^2 + 4 (alpha qx)^2.
    cdouble alpha2_sum{};
    int alpha2_n = 0;
    for (const auto& [qx, d2] : pair_diff2) {
        if (std::abs(qx) < 0.05) continue;
        const cdouble delta = p.eps_A - p.eps_E - p.k * qx - p.g * qx * qx;
        alpha2_sum += (d2 - delta * delta) / (4.0 * qx * qx);
        ++alpha2_n;
    }
    if (alpha2_n > 0) {
        p.alpha = std::sqrt(alpha2_sum / static_cast<double>(alpha2_n));
    } else {
        p.alpha = 0.05;
    }
    return p;
}

void canonicalize_alpha(PjtParams& p, std::vector<std::string>& notes) {
    const bool flip = (p.alpha.real() < 0.0) ||
                      (p.alpha.real() == 0.0 && p.alpha.imag() < 0.0);
    if (flip) {
        p.alpha = -p.alpha;
        p.beta = -p.beta;
        notes.push_back("sign convention Re(alpha) >= 0 applied (model depends on "
                        "(alpha, beta) only quadratically)");
    }
}

}  // namespace

FitResult fit_pjt_slice(const std::vector<ResonanceSample>& data, int order,
                        const PjtParams* init, const SliceFitOptions& opts) {
    if (order != 2 && order != 3) throw DomainError("fit_pjt_slice: order must be 2 or 3");
    const int np = (order == 3) ? 18 : 12;
    bool has_neg = false, has_pos = false;
    for (const auto& s : data) {
        if (std::abs(s.q.qy) > 1e-12) {
            throw DomainError("fit_pjt_slice: data must lie on the Qy = 0 slice");
        }
        if (s.q.qx < 0.0) has_neg = true;
        if (s.q.qx > 0.0) has_pos = true;
    }
    if (!has_neg || !has_pos) {
        throw IllPosedError("fit_pjt_slice: data must cover both signs of Qx");
    }
    if (static_cast<int>(2 * data.size()) < np) {
        throw IllPosedError("fit_pjt_slice: not enough samples for the parameter count");
    }

    const auto residual_fn = [&](const Eigen::VectorXd& x) {
        const PjtParams p = SliceModel::unpack(x, order);
        Eigen::VectorXd r(2 * data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto eval = evaluate_slice(p, data[i].q.qx);
            const int b = resolve_branch(data[i], eval) - 1;
            const cdouble diff = eval.v[b] - assemble_potential(data[i]);
            r(2 * i) = opts.weight_re * diff.real();
            r(2 * i + 1) = opts.weight_im * diff.imag();
        }
        return r;
    };
    const auto jacobian_fn = [&](const Eigen::VectorXd& x) {
        const PjtParams p = SliceModel::unpack(x, order);
        Eigen::MatrixXd j(2 * data.size(), np);
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto eval = evaluate_slice(p, data[i].q.qx);
            const int b = resolve_branch(data[i], eval) - 1;
            for (int ip = 0; ip < np / 2; ++ip) {
                const cdouble d = eval.dv[b][ip];
                // d/d(Re p) = d, d/d(Im p) = i d for the analytic model.
                j(2 * i, 2 * ip) = opts.weight_re * d.real();
                j(2 * i, 2 * ip + 1) = opts.weight_re * -d.imag();
                j(2 * i + 1, 2 * ip) = opts.weight_im * d.imag();
                j(2 * i + 1, 2 * ip + 1) = opts.weight_im * d.real();
            }
        }
        return j;
    };

    PjtParams start = (init != nullptr) ? *init : estimate_slice_start(data, order);
    start.order = order;
    const Eigen::VectorXd x0 = SliceModel::pack(start);

    {
        const Eigen::MatrixXd j0 = jacobian_fn(x0);
        const auto qr = j0.colPivHouseholderQr();
        if (qr.rank() < np) {
            throw NumericalError("fit_pjt_slice: Jacobian is rank deficient at the start");
        }
    }

    const LmResult lm = levenberg_marquardt(residual_fn, jacobian_fn, x0, opts.lm);

    FitResult out;
    PjtParams fitted = SliceModel::unpack(lm.x, order);
    out.iterations = lm.iterations;
    out.converged = lm.converged;
    canonicalize_alpha(fitted, out.notes);
    out.params = fitted;
    out.residual = residual_fn(SliceModel::pack(fitted)).squaredNorm();

    const int m = static_cast<int>(2 * data.size());
    if (m > np) {
        const double s2 = out.residual / (m - np);
        const Eigen::MatrixXd cov = s2 * lm.jtj.inverse();
        for (int i = 0; i < np; ++i) {
            out.uncertainty.push_back(std::sqrt(std::max(cov(i, i), 0.0)));
        }
        out.notes.push_back("uncertainties are linearized and indicative only");
    }
    return out;
}

FitResult fit_jt_slice(const std::vector<ResonanceSample>& data) {
    std::vector<const ResonanceSample*> rows;
    for (const auto& s : data) {
        if (std::abs(s.q.qy) > 1e-12) {
            throw DomainError("fit_jt_slice: data must lie on the Qy = 0 slice");
        }
        if (s.branch == 1 || s.branch == 2) rows.push_back(&s);
    }
    if (rows.size() < 4) {
        throw IllPosedError("fit_jt_slice: need at least 4 E-branch samples");
    }

    // V_{1/2} = eps_E + (omega/2) qx^2 +/- (k qx + g qx^2): linear in the
    // parameters, identical design matrix for real and imaginary parts.
    Eigen::MatrixXd a(rows.size(), 4);
    Eigen::VectorXd yr(rows.size()), yi(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double qx = rows[i]->q.qx;
        const double sign = (rows[i]->branch == 1) ? 1.0 : -1.0;
        a(i, 0) = 1.0;
        a(i, 1) = 0.5 * qx * qx;
        a(i, 2) = sign * qx;
        a(i, 3) = sign * qx * qx;
        const cdouble v = assemble_potential(*rows[i]);
        yr(i) = v.real();
        yi(i) = v.imag();
    }
    const auto qr = a.colPivHouseholderQr();
    if (qr.rank() < 4) {
        throw IllPosedError("fit_jt_slice: design matrix is rank deficient (need both "
                            "branches and both signs of Qx)");
    }
    const Eigen::VectorXd cr = qr.solve(yr);
    const Eigen::VectorXd ci = qr.solve(yi);

    JtParams p;
    p.eps_E = {cr(0), ci(0)};
    p.omega = {cr(1), ci(1)};
    p.k = {cr(2), ci(2)};
    p.g = {cr(3), ci(3)};

    FitResult out;
    out.params = p;
    out.iterations = 1;
    out.converged = true;
    out.residual = (a * cr - yr).squaredNorm() + (a * ci - yi).squaredNorm();

    const int m = static_cast<int>(2 * rows.size());
    if (m > 8) {
        const double s2 = out.residual / (m - 8);
        const Eigen::MatrixXd cov = s2 * (a.transpose() * a).inverse();
        for (int i = 0; i < 4; ++i) {
            out.uncertainty.push_back(std::sqrt(std::max(cov(i, i), 0.0)));
            out.uncertainty.push_back(out.uncertainty.back());
        }
        out.notes.push_back("uncertainties are linearized and indicative only");
    }
    return out;
}

std::vector<ResonanceSample> synth_data(const ModelParams& model, const SynthSpec& spec) {
    if (spec.sigma < 0.0) throw DomainError("synth_data: sigma must be non-negative");
    const int nb = model_dim(model) == 2 ? 2 : 3;
    detail::GaussianStream gauss(spec.seed);
    std::vector<ResonanceSample> out;
    out.reserve(spec.qx.size() * nb);
    for (const double qx : spec.qx) {
        const auto v = detail::slice_branch_values(model, qx);
        for (int b = 0; b < nb; ++b) {
            cdouble value = v[b];
            if (spec.sigma > 0.0) {
                value += spec.sigma * cdouble(gauss.next(), gauss.next());
            }
            ResonanceSample s;
            s.q = NuclearCoords::from_cartesian(qx, 0.0);
            s.branch = b + 1;
            s.v_ion = spec.v_ion;
            s.eps_n = value.real() - spec.v_ion;
            s.gamma_n = -2.0 * value.imag();
            out.push_back(s);
        }
    }
    return out;
}

}  // namespace vibronic
