#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "fixtures.hpp"
#include "vibronic/diabatic.hpp"

using namespace vibronic;
using vibronic::testing::h3_jt2;
using vibronic::testing::h3_pjt2;
using vibronic::testing::h3_pjt3;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Sorted eigenvalue list for spectrum comparisons, independent of the
// library's own eigensystem module.
std::array<cdouble, 3> spectrum(const Eigen::Matrix3cd& m) {
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> s(m, false);
    std::array<cdouble, 3> ev{s.eigenvalues()(0), s.eigenvalues()(1), s.eigenvalues()(2)};
    std::sort(ev.begin(), ev.end(), [](cdouble a, cdouble b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return ev;
}

}  // namespace

TEST_SUITE("diabatic") {

TEST_CASE("coupling matrices at phi = 0") {
    const auto j = coupling_matrices(NuclearCoords::from_polar(1.0, 0.0));
    CHECK(j.j_k(1, 1) == doctest::Approx(1.0));
    CHECK(j.j_k(2, 2) == doctest::Approx(-1.0));
    CHECK(j.j_k(1, 2) == doctest::Approx(0.0));
    CHECK(j.j_g(1, 1) == doctest::Approx(1.0));
    CHECK(j.j_g(2, 2) == doctest::Approx(-1.0));
    CHECK(j.j_alpha(0, 1) == doctest::Approx(1.0));
    CHECK(j.j_alpha(0, 2) == doctest::Approx(0.0));
    // First row/column of the JT blocks and the E-block of j_alpha vanish.
    for (int i = 0; i < 3; ++i) {
        CHECK(j.j_k(0, i) == 0.0);
        CHECK(j.j_k(i, 0) == 0.0);
        CHECK(j.j_g(0, i) == 0.0);
        CHECK(j.j_g(i, 0) == 0.0);
    }
    for (int i = 1; i < 3; ++i)
        for (int c = 1; c < 3; ++c) CHECK(j.j_alpha(i, c) == 0.0);
}

TEST_CASE("coupling matrices vanish at the origin") {
    const auto j = coupling_matrices(NuclearCoords::from_polar(0.0, 0.77));
    CHECK(j.j_k.norm() == 0.0);
    CHECK(j.j_g.norm() == 0.0);
    CHECK(j.j_alpha.norm() == 0.0);
}

TEST_CASE("coupling matrices at phi = pi/2") {
    const auto j = coupling_matrices(NuclearCoords::from_polar(1.0, kPi / 2.0));
    CHECK(j.j_k(1, 1) == doctest::Approx(0.0));
    CHECK(j.j_k(1, 2) == doctest::Approx(1.0));
    CHECK(j.j_k(2, 1) == doctest::Approx(1.0));
    CHECK(j.j_g(1, 1) == doctest::Approx(-1.0));
    CHECK(j.j_g(2, 2) == doctest::Approx(1.0));
    CHECK(j.j_alpha(0, 2) == doctest::Approx(-1.0));
    // Symmetry of all three.
    CHECK((j.j_k - j.j_k.transpose()).norm() == doctest::Approx(0.0));
    CHECK((j.j_g - j.j_g.transpose()).norm() == doctest::Approx(0.0));
    CHECK((j.j_alpha - j.j_alpha.transpose()).norm() == doctest::Approx(0.0));
}

TEST_CASE("pjt matrix at the origin is diagonal with the state energies") {
    const auto v = build_pjt_diabatic(h3_pjt2(), NuclearCoords::from_cartesian(0.0, 0.0));
    CHECK(v.dim == 3);
    CHECK(v.m(0, 0) == cdouble(0.3760, -0.0027));
    CHECK(v.m(1, 1) == cdouble(0.3339, -0.0121));
    CHECK(v.m(2, 2) == cdouble(0.3339, -0.0121));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(std::abs(v.m(i, j)) == 0.0);
}

TEST_CASE("pjt A-Ex coupling is linear in rho") {
    const auto v = build_pjt_diabatic(h3_pjt2(), NuclearCoords::from_polar(0.5, 0.0));
    CHECK(v.m(0, 1).real() == doctest::Approx(0.03135).epsilon(1e-12));
    CHECK(v.m(0, 1).imag() == doctest::Approx(0.0009).epsilon(1e-12));
}

TEST_CASE("polar and cartesian construction agree") {
    const auto p = h3_pjt2();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double rho = 0.6 * u(rng);
        const double phi = 2.0 * kPi * u(rng);
        const auto qp = NuclearCoords::from_polar(rho, phi);
        const auto qc = NuclearCoords::from_cartesian(qp.qx, qp.qy);
        const auto vp = build_pjt_diabatic(p, qp);
        const auto vc = build_pjt_diabatic(p, qc);
        CHECK((vp.m - vc.m).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("matrices are exactly symmetric by construction") {
    const auto p = h3_pjt2();
    const auto jt = h3_jt2();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int i = 0; i < 100; ++i) {
        const auto q = NuclearCoords::from_cartesian(u(rng), u(rng));
        const auto v = build_pjt_diabatic(p, q);
        const auto w = build_jt_diabatic(jt, q);
        for (int r = 0; r < 3; ++r) {
            for (int c = r + 1; c < 3; ++c) {
                CHECK(v.m(r, c) == v.m(c, r));  // bitwise
                CHECK(w.m(r, c) == w.m(c, r));
            }
        }
    }
}

TEST_CASE("jt matrix examples") {
    const auto p = h3_jt2();
    const auto v0 = build_jt_diabatic(p, NuclearCoords::from_cartesian(0.0, 0.0));
    CHECK(v0.dim == 2);
    CHECK(v0.m(0, 0) == p.eps_E);
    CHECK(v0.m(1, 1) == p.eps_E);
    CHECK(std::abs(v0.m(0, 1)) == 0.0);

    const auto v1 = build_jt_diabatic(p, NuclearCoords::from_polar(1.0, 0.0));
    const cdouble expected00 = p.eps_E + 0.5 * p.omega + p.k + p.g;
    const cdouble expected11 = p.eps_E + 0.5 * p.omega - p.k - p.g;
    CHECK(std::abs(v1.m(0, 0) - expected00) < 1e-16);
    CHECK(std::abs(v1.m(1, 1) - expected11) < 1e-16);
    CHECK(std::abs(v1.m(0, 1)) < 1e-16);
}

TEST_CASE("jt equals the E-block of the alpha = 0 pjt model") {
    auto p = h3_pjt2();
    p.alpha = 0.0;
    JtParams jt;
    jt.eps_E = p.eps_E;
    jt.omega = p.omega;
    jt.k = p.k;
    jt.g = p.g;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int i = 0; i < 50; ++i) {
        const auto q = NuclearCoords::from_cartesian(u(rng), u(rng));
        const auto v3 = build_pjt_diabatic(p, q);
        const auto v2 = build_jt_diabatic(jt, q);
        CHECK(std::abs(v3.m(1, 1) - v2.m(0, 0)) < 1e-16);
        CHECK(std::abs(v3.m(2, 2) - v2.m(1, 1)) < 1e-16);
        CHECK(std::abs(v3.m(1, 2) - v2.m(0, 1)) < 1e-16);
    }
}

TEST_CASE("third order requires the Qy = 0 slice") {
    const auto p = h3_pjt3();
    CHECK_NOTHROW(build_pjt_diabatic(p, NuclearCoords::from_cartesian(0.3, 0.0)));
    CHECK_NOTHROW(build_pjt_diabatic(p, NuclearCoords::from_cartesian(-0.4, 0.0)));
    CHECK_THROWS_AS(build_pjt_diabatic(p, NuclearCoords::from_cartesian(0.3, 0.01)),
                    UnsupportedRegionError);
}

TEST_CASE("third-order slice terms enter with the documented pattern") {
    const auto p = h3_pjt3();
    const double qx = -0.37;
    const auto v = build_pjt_diabatic(p, NuclearCoords::from_cartesian(qx, 0.0));
    auto p2 = p;
    p2.order = 2;
    const auto v2 = build_pjt_diabatic(p2, NuclearCoords::from_cartesian(qx, 0.0));
    const double q3 = qx * qx * qx;
    CHECK(std::abs((v.m(0, 0) - v2.m(0, 0)) - p.nu * q3) < 1e-16);
    CHECK(std::abs((v.m(1, 1) - v2.m(1, 1)) - (p.nu + p.mu) * q3) < 1e-16);
    CHECK(std::abs((v.m(2, 2) - v2.m(2, 2)) - (p.nu - p.mu) * q3) < 1e-16);
    CHECK(std::abs((v.m(0, 1) - v2.m(0, 1)) - p.beta * qx * qx) < 1e-16);
    CHECK(std::abs(v.m(0, 2) - v2.m(0, 2)) == 0.0);
}

TEST_CASE("gamma matrix is -2 Im of the potential") {
    const auto p = h3_pjt2();
    const auto q0 = NuclearCoords::from_cartesian(0.0, 0.0);
    const auto gamma = gamma_matrix(p, q0);
    CHECK(gamma(1, 1) == doctest::Approx(0.0242).epsilon(1e-12));
    CHECK(gamma(0, 0) == doctest::Approx(0.0054).epsilon(1e-12));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(gamma(i, j) == 0.0);

    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int i = 0; i < 30; ++i) {
        const auto q = NuclearCoords::from_cartesian(u(rng), u(rng));
        const auto g = gamma_matrix(p, q);
        const auto v = build_pjt_diabatic(p, q);
        CHECK((g - g.transpose()).norm() == 0.0);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) CHECK(g(r, c) == -2.0 * v.m(r, c).imag());
    }
}

TEST_CASE("C3 covariance and reflection symmetry of the spectrum") {
    const auto p = h3_pjt2();
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double rho = 0.55 * u(rng) + 0.01;
        const double phi = 2.0 * kPi * u(rng);
        const auto ev0 = spectrum(build_pjt_diabatic(p, NuclearCoords::from_polar(rho, phi)).m);
        const auto ev1 = spectrum(
            build_pjt_diabatic(p, NuclearCoords::from_polar(rho, phi + 2.0 * kPi / 3.0)).m);
        const auto ev2 = spectrum(build_pjt_diabatic(p, NuclearCoords::from_polar(rho, -phi)).m);
        for (int n = 0; n < 3; ++n) {
            CHECK(std::abs(ev0[n] - ev1[n]) < 1e-12 * std::abs(ev0[n]));
            CHECK(std::abs(ev0[n] - ev2[n]) < 1e-12 * std::abs(ev0[n]));
        }
    }
}

TEST_CASE("real parameters give a real symmetric matrix") {
    auto p = h3_pjt2();
    p.eps_E = p.eps_E.real();
    p.eps_A = p.eps_A.real();
    p.omega = p.omega.real();
    p.k = p.k.real();
    p.g = p.g.real();
    p.alpha = p.alpha.real();
    const auto v = build_pjt_diabatic(p, NuclearCoords::from_cartesian(0.21, -0.34));
    CHECK(v.m.imag().norm() == 0.0);
}

TEST_CASE("parameter validation") {
    auto p = h3_pjt2();
    p.omega = cdouble(std::nan(""), 0.0);
    CHECK_THROWS_AS(p.validate(), DomainError);
    auto p2 = h3_pjt2();
    p2.order = 5;
    CHECK_THROWS_AS(p2.validate(), DomainError);
}

}  // TEST_SUITE
