#include "vibronic/params.hpp"

#include <cmath>

namespace vibronic {

bool is_finite(cdouble z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

void PjtParams::validate() const {
    const std::pair<cdouble, const char*> entries[] = {
        {eps_E, "eps_E"}, {eps_A, "eps_A"}, {omega, "omega"},
        {k, "k"}, {g, "g"}, {alpha, "alpha"}};
    for (const auto& [z, name] : entries) {
        if (!is_finite(z)) throw DomainError(std::string("PjtParams: non-finite ") + name);
    }
    if (order != 2 && order != 3) {
        throw DomainError("PjtParams: order must be 2 or 3");
    }
    if (order == 3 && (!is_finite(beta) || !is_finite(nu) || !is_finite(mu))) {
        throw DomainError("PjtParams: non-finite third-order parameter");
    }
}

void JtParams::validate() const {
    if (!is_finite(eps_E) || !is_finite(omega) || !is_finite(k) || !is_finite(g)) {
        throw DomainError("JtParams: non-finite parameter");
    }
}

int model_dim(const ModelParams& m) {
    return std::holds_alternative<JtParams>(m) ? 2 : 3;
}

}  // namespace vibronic
