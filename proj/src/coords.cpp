#include "vibronic/coords.hpp"

#include <cmath>

namespace vibronic {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw DomainError(std::string("NuclearCoords: non-finite ") + what);
    }
}

double fold_angle(double phi) {
    double w = std::fmod(phi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

}  // namespace

NuclearCoords NuclearCoords::from_cartesian(double qx, double qy) {
    require_finite(qx, "qx");
    require_finite(qy, "qy");
    NuclearCoords q;
    q.qx = qx;
    q.qy = qy;
    q.rho = std::hypot(qx, qy);
    q.phi = (q.rho == 0.0) ? 0.0 : fold_angle(std::atan2(qy, qx));
    return q;
}

NuclearCoords NuclearCoords::from_polar(double rho, double phi) {
    require_finite(rho, "rho");
    require_finite(phi, "phi");
    if (rho < 0.0) {
        rho = -rho;
        phi += kTwoPi / 2.0;
    }
    NuclearCoords q;
    q.rho = rho;
    q.phi = (rho == 0.0) ? 0.0 : fold_angle(phi);
    q.qx = rho * std::cos(q.phi);
    q.qy = rho * std::sin(q.phi);
    return q;
}

NuclearCoords NuclearCoords::from_bond_displacements(double dr1, double dr2, double dr3) {
    require_finite(dr1, "dr1");
    require_finite(dr2, "dr2");
    require_finite(dr3, "dr3");
    const double qx = kCoordScale / std::sqrt(3.0) * (2.0 * dr1 - dr2 - dr3);
    const double qy = kCoordScale * (dr2 - dr3);
    return from_cartesian(qx, qy);
}

double distance(const NuclearCoords& a, const NuclearCoords& b) {
    return std::hypot(a.qx - b.qx, a.qy - b.qy);
}

}  // namespace vibronic
