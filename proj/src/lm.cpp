#include "vibronic/lm.hpp"

#include <cmath>

#include "vibronic/types.hpp"

namespace vibronic {

namespace {

bool finite_sse(const Eigen::VectorXd& r, double& sse) {
    sse = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (!std::isfinite(r(i))) return false;
        sse += r(i) * r(i);
    }
    return true;
}

}  // namespace

LmResult levenberg_marquardt(const LmResidualFn& residual, const LmJacobianFn& jacobian,
                             Eigen::VectorXd x0, const LmOptions& opts) {
    LmResult out;
    out.x = std::move(x0);

    Eigen::VectorXd r = residual(out.x);
    double sse = 0.0;
    if (!finite_sse(r, sse)) {
        throw DomainError("levenberg_marquardt: residual not finite at the starting point");
    }
    out.sse = sse;

    double damping = opts.initial_damping;
    const int n = static_cast<int>(out.x.size());
    out.jtj = Eigen::MatrixXd::Zero(n, n);

    for (out.iterations = 1; out.iterations <= opts.max_iterations; ++out.iterations) {
        const Eigen::MatrixXd j = jacobian(out.x);
        const Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::VectorXd g = j.transpose() * r;
        out.jtj = jtj;

        bool accepted = false;
        while (damping < 1e15) {
            Eigen::MatrixXd a = jtj;
            for (int i = 0; i < n; ++i) {
                const double d = std::max(jtj(i, i), 1e-30);
                a(i, i) += damping * d;
            }
            const Eigen::VectorXd step = a.ldlt().solve(-g);
            const Eigen::VectorXd x_try = out.x + step;
            const Eigen::VectorXd r_try = residual(x_try);
            double sse_try = 0.0;
            if (finite_sse(r_try, sse_try) && sse_try <= sse) {
                const double drop = sse - sse_try;
                out.x = x_try;
                r = r_try;
                sse = sse_try;
                out.sse = sse;
                damping = std::max(damping / opts.damping_factor, 1e-15);
                accepted = true;
                if (drop <= opts.relative_tolerance * std::max(sse, 1e-300)) {
                    out.converged = true;
                    return out;
                }
                break;
            }
            damping *= opts.damping_factor;
        }
        if (!accepted) {
            // No downhill step at any damping: stationary point.
            out.converged = true;
            return out;
        }
    }
    return out;  // converged stays false: iteration budget exhausted
}

}  // namespace vibronic
