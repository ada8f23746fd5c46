#include "vibronic/diabatic.hpp"

#include <cmath>

namespace vibronic {

namespace {

// Third-order terms are defined only along the C2v-preserving slice.
bool on_qy0_slice(const NuclearCoords& q) {
    return std::abs(q.qy) <= 1e-14 * std::max(1.0, std::abs(q.qx));
}

}  // namespace

CouplingMatrices coupling_matrices(const NuclearCoords& q) {
    const double c1 = std::cos(q.phi), s1 = std::sin(q.phi);
    const double c2 = std::cos(2.0 * q.phi), s2 = std::sin(2.0 * q.phi);
    const double r = q.rho, r2 = q.rho * q.rho;

    CouplingMatrices j;
    j.j_k(1, 1) = r * c1;
    j.j_k(1, 2) = r * s1;
    j.j_k(2, 1) = r * s1;
    j.j_k(2, 2) = -r * c1;

    j.j_g(1, 1) = r2 * c2;
    j.j_g(1, 2) = -r2 * s2;
    j.j_g(2, 1) = -r2 * s2;
    j.j_g(2, 2) = -r2 * c2;

    j.j_alpha(0, 1) = r * c1;
    j.j_alpha(1, 0) = r * c1;
    j.j_alpha(0, 2) = -r * s1;
    j.j_alpha(2, 0) = -r * s1;
    return j;
}

DiabaticMatrix build_pjt_diabatic(const PjtParams& p, const NuclearCoords& q) {
    p.validate();
    if (p.order == 3 && !on_qy0_slice(q)) {
        throw UnsupportedRegionError(
            "build_pjt_diabatic: third-order terms are defined only on the Qy=0 slice");
    }
    DiabaticMatrix v;
    v.dim = 3;
    v.m = detail::pjt_entries<double>(p, q.rho, q.phi);
    return v;
}

DiabaticMatrix build_jt_diabatic(const JtParams& p, const NuclearCoords& q) {
    p.validate();
    DiabaticMatrix v;
    v.dim = 2;
    v.m.setZero();
    v.m.topLeftCorner<2, 2>() = detail::jt_entries<double>(p, q.rho, q.phi);
    return v;
}

Eigen::Matrix3d gamma_matrix(const PjtParams& p, const NuclearCoords& q) {
    const DiabaticMatrix v = build_pjt_diabatic(p, q);
    return -2.0 * v.m.imag();
}

DiabaticMatrix build_diabatic(const ModelParams& m, const NuclearCoords& q) {
    if (const auto* jt = std::get_if<JtParams>(&m)) {
        return build_jt_diabatic(*jt, q);
    }
    return build_pjt_diabatic(std::get<PjtParams>(m), q);
}

}  // namespace vibronic
