#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vibronic/adiabatic.hpp"
#include "vibronic/lm.hpp"

namespace vibronic {

/// Branch label for samples known only to have A1 symmetry (branch 1 or 3);
/// those are assigned to the nearest model value during the fit.
inline constexpr int kBranchAmbiguousA1 = 0;

/// Fixed-geometry resonance data: position above the ion and width.
struct ResonanceSample {
    NuclearCoords q;
    int branch = 1;  // 1..3, or kBranchAmbiguousA1
    double eps_n = 0.0;
    double gamma_n = 0.0;  // >= 0
    double v_ion = 0.0;
};

/// V = V_ion + eps - i gamma / 2. Throws for gamma < 0.
cdouble assemble_potential(const ResonanceSample& s);

/// Sampled derivative of the eigenphase sum at a fixed geometry.
struct TimeDelayCurve {
    std::vector<double> energy;
    std::vector<double> ddelta_de;
};

/// Sum of resonance Lorentzians plus a constant background derivative.
/// Throws when any width is non-positive.
double bw_time_delay(double e, const std::vector<std::pair<double, double>>& resonances,
                     double bg);

struct BwFitResult {
    std::vector<std::pair<double, double>> resonances;  // (eps, gamma), eps-sorted
    double bg = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> uncertainty;  // indicative only, parameter order (eps,gamma)*n, bg
    std::vector<std::string> notes;
};

/// Least-squares fit of n_res Lorentzians plus background to a time-delay
/// curve. init, when given, supplies (eps, gamma) starting values.
BwFitResult fit_time_delay(const TimeDelayCurve& curve, int n_res,
                           const std::vector<std::pair<double, double>>* init = nullptr);

struct FitResult {
    ModelParams params;
    double residual = 0.0;  // weighted SSE, reproducible at the returned params
    int iterations = 0;
    bool converged = false;
    std::vector<double> uncertainty;  // indicative only
    std::vector<std::string> notes;
};

struct SliceFitOptions {
    double weight_re = 1.0;
    double weight_im = 1.0;
    LmOptions lm;
};

/// Nonlinear least-squares fit of the coupled slice model (both real and
/// imaginary parts simultaneously). Data must cover both signs of Qx and all
/// three branches. The (alpha, beta) pair enters the model quadratically, so
/// its overall sign is fixed by convention: Re(alpha) >= 0.
FitResult fit_pjt_slice(const std::vector<ResonanceSample>& data, int order,
                        const PjtParams* init = nullptr, const SliceFitOptions& opts = {});

/// Linear least-squares fit of the two JT slice branches; real and imaginary
/// parts solve independently with the same design matrix.
FitResult fit_jt_slice(const std::vector<ResonanceSample>& data);

/// Synthetic slice data from the closed-form branch potentials with seeded
/// Gaussian noise of the given sigma on both potential components.
struct SynthSpec {
    std::vector<double> qx;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    double v_ion = 0.0;
};

std::vector<ResonanceSample> synth_data(const ModelParams& model, const SynthSpec& spec);

namespace detail {

/// Deterministic standard-normal generator (explicit Box-Muller over a
/// mt19937_64 stream) so synthetic datasets are byte-stable across builds.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : state_(seed) {}
    double next();

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
    double uniform();
};

/// Slice model values for all three (two) branches at one geometry.
std::array<cdouble, 3> slice_branch_values(const ModelParams& model, double qx);

}  // namespace detail

}  // namespace vibronic
