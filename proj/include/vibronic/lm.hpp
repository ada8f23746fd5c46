#pragma once

#include <functional>

#include <Eigen/Dense>

namespace vibronic {

/// Damped least-squares settings; damping scales the normal-matrix diagonal
/// and moves by the given factor on rejected/accepted steps.
struct LmOptions {
    double initial_damping = 1e-3;
    double damping_factor = 10.0;
    double relative_tolerance = 1e-12;
    int max_iterations = 500;
};

struct LmResult {
    Eigen::VectorXd x;
    double sse = 0.0;
    int iterations = 0;
    bool converged = false;
    Eigen::MatrixXd jtj;  // normal matrix at the solution, for diagnostics
};

using LmResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using LmJacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Levenberg-Marquardt minimization of |r(x)|^2. The residual function may
/// return non-finite entries to veto a trial point (the step is rejected and
/// damping increased). The accepted-step residual sequence is non-increasing.
LmResult levenberg_marquardt(const LmResidualFn& residual, const LmJacobianFn& jacobian,
                             Eigen::VectorXd x0, const LmOptions& opts = {});

}  // namespace vibronic
