#pragma once

#include "vibronic/params.hpp"

namespace vibronic::testing {

// Reference parameter sets for the H3 resonant-state models shipped with the
// toolkit (also available as JSON files under data/). Energies in Hartree.

inline PjtParams h3_pjt2() {
    PjtParams p;
    p.eps_E = {0.3339, -0.0121};
    p.eps_A = {0.3760, -0.0027};
    p.omega = {-0.0031, 0.0019};
    p.k = {-0.0037, -0.0012};
    p.g = {0.0085, -0.0021};
    p.alpha = {0.0627, 0.0018};
    p.order = 2;
    return p;
}

inline PjtParams h3_pjt3() {
    PjtParams p;
    p.eps_E = {0.3339, -0.0121};
    p.eps_A = {0.3760, -0.0027};
    p.omega = {-0.0033, 0.0020};
    p.k = {-0.0036, -0.0011};
    p.g = {0.0086, -0.0021};
    p.alpha = {0.0627, 0.0018};
    p.order = 3;
    p.beta = {0.0011, 0.0000};
    p.nu = {-0.0005, -0.0003};
    p.mu = {-0.0006, -0.0004};
    return p;
}

inline JtParams h3_jt2() {
    JtParams p;
    p.eps_E = {0.3339, -0.0121};
    p.omega = {-0.0741, 0.0089};
    p.k = {-0.0034, -0.0011};
    p.g = {0.0268, 0.0014};
    return p;
}

}  // namespace vibronic::testing
