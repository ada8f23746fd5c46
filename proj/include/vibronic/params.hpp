#pragma once

#include <variant>

#include "vibronic/types.hpp"

namespace vibronic {

/// Complex expansion coefficients of the (E+A)xe pseudo-Jahn-Teller model.
/// All energies in Hartree. Real parts describe the potential (including the
/// continuum level shift), imaginary parts the autoionization widths.
/// order == 3 additionally enables {beta, nu, mu}, which are meaningful only
/// on the Qy = 0 slice.
struct PjtParams {
    cdouble eps_E{};
    cdouble eps_A{};
    cdouble omega{};
    cdouble k{};
    cdouble g{};
    cdouble alpha{};
    int order = 2;
    cdouble beta{};
    cdouble nu{};
    cdouble mu{};

    /// Throws DomainError on non-finite entries or bad order flag.
    void validate() const;
};

/// Complex Jahn-Teller parameters (the alpha = 0, E-block limit).
struct JtParams {
    cdouble eps_E{};
    cdouble omega{};
    cdouble k{};
    cdouble g{};

    void validate() const;
};

/// Either model, for operations that work on both.
using ModelParams = std::variant<JtParams, PjtParams>;

/// Number of electronic states (2 for JT, 3 for PJT).
int model_dim(const ModelParams& m);

bool is_finite(cdouble z);

}  // namespace vibronic
