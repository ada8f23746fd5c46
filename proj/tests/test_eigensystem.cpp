#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "vibronic/adiabatic.hpp"
#include "vibronic/diabatic.hpp"
#include "vibronic/eigensystem.hpp"

using namespace vibronic;
using vibronic::testing::h3_jt2;
using vibronic::testing::h3_pjt2;

namespace {
constexpr double kPi = 3.14159265358979323846;

DiabaticMatrix matrix2(cdouble a, cdouble b, cdouble c) {
    DiabaticMatrix m;
    m.dim = 2;
    m.m.setZero();
    m.m(0, 0) = a;
    m.m(0, 1) = b;
    m.m(1, 0) = b;
    m.m(1, 1) = c;
    return m;
}
}  // namespace

TEST_SUITE("eigensystem") {

TEST_CASE("diagonal matrix") {
    DiabaticMatrix m;
    m.dim = 3;
    m.m.setZero();
    m.m(0, 0) = cdouble(3.0, -0.5);
    m.m(1, 1) = cdouble(1.0, 0.25);
    m.m(2, 2) = cdouble(2.0, 0.0);
    const auto es = eig_complex_symmetric(m);
    CHECK(std::abs(es.values[0] - cdouble(1.0, 0.25)) < 1e-14);
    CHECK(std::abs(es.values[1] - cdouble(2.0, 0.0)) < 1e-14);
    CHECK(std::abs(es.values[2] - cdouble(3.0, -0.5)) < 1e-14);
    // Columns are (signed) unit vectors.
    for (int i = 0; i < 3; ++i) {
        int nonzero = 0;
        for (int r = 0; r < 3; ++r)
            if (std::abs(es.vectors(r, i)) > 1e-12) ++nonzero;
        CHECK(nonzero == 1);
        CHECK(es.rigidity[i] == doctest::Approx(1.0));
    }
}

TEST_CASE("symmetric off-diagonal 2x2") {
    const auto es = eig_complex_symmetric(matrix2(0.0, 1.0, 0.0));
    CHECK(std::abs(es.values[0] - cdouble(-1.0)) < 1e-15);
    CHECK(std::abs(es.values[1] - cdouble(1.0)) < 1e-15);
    CHECK(!es.any_coalesced);
}

TEST_CASE("exceptional point matrix is detected as coalesced") {
    const auto es = eig_complex_symmetric(matrix2(1.0, cdouble(0.0, 1.0), -1.0));
    CHECK(std::abs(es.values[0]) < 1e-9);
    CHECK(std::abs(es.values[1]) < 1e-9);
    CHECK(es.values[0] + es.values[1] == cdouble(0.0));  // trace exactly
    CHECK(es.any_coalesced);
    CHECK(es.pair_coalesced[pair_index(0, 1)]);
    CHECK(es.rigidity[0] < 1e-8);
    CHECK(es.rigidity[1] < 1e-8);
}

TEST_CASE("non-symmetric input is rejected") {
    DiabaticMatrix m;
    m.dim = 2;
    m.m.setZero();
    m.m(0, 1) = 1.0;
    m.m(1, 0) = 1.0 + 1e-6;
    CHECK_THROWS_AS(eig_complex_symmetric(m), DomainError);
}

TEST_CASE("decomposition contract on random pjt matrices") {
    const auto p = h3_pjt2();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int i = 0; i < 200; ++i) {
        const auto q = NuclearCoords::from_cartesian(u(rng), u(rng));
        if (q.rho < 1e-3) continue;
        const auto m = build_pjt_diabatic(p, q);
        const auto es = eig_complex_symmetric(m);
        REQUIRE(!es.any_coalesced);

        const double mnorm = m.m.norm();
        Eigen::Matrix3cd d = Eigen::Matrix3cd::Zero();
        for (int n = 0; n < 3; ++n) d(n, n) = es.values[n];
        CHECK((m.m * es.vectors - es.vectors * d).norm() < 1e-12 * mnorm);

        const Eigen::Matrix3cd idm = es.vectors.transpose() * es.vectors;
        CHECK((idm - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff() < 1e-10);

        const cdouble tr = m.m(0, 0) + m.m(1, 1) + m.m(2, 2);
        const cdouble sum = es.values[0] + es.values[1] + es.values[2];
        CHECK(std::abs(sum - tr) < 1e-12 * std::max(std::abs(tr), mnorm));

        // Ascending real part.
        CHECK(es.values[0].real() <= es.values[1].real());
        CHECK(es.values[1].real() <= es.values[2].real());
    }
}

TEST_CASE("pjt eigenvalues match the analytic slice potentials on a grid") {
    const auto p = h3_pjt2();
    int checked = 0;
    for (int ix = 0; ix < 21; ++ix) {
        const double qx = -0.5 + ix / 20.0;
        const auto v = analytic_slice_potentials(p, qx);
        const auto es =
            eig_complex_symmetric(build_pjt_diabatic(p, NuclearCoords::from_cartesian(qx, 0.0)));
        // Greedy assignment of the three analytic values onto the computed set.
        std::array<cdouble, 3> want{v.v1, v.v2, v.v3};
        std::array<bool, 3> used{false, false, false};
        for (const auto& w : want) {
            int best = -1;
            double dist = 1e300;
            for (int n = 0; n < 3; ++n) {
                if (used[n]) continue;
                const double dd = std::abs(es.values[n] - w);
                if (dd < dist) { dist = dd; best = n; }
            }
            used[best] = true;
            CHECK(dist <= 1e-12 * std::abs(w));
            ++checked;
        }
    }
    CHECK(checked == 63);
}

TEST_CASE("jt closed form matches the 2x2 numerics") {
    const auto p = h3_jt2();
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double rho = 0.01 + 0.55 * u01(rng);
        const double phi = 2.0 * kPi * u01(rng);
        const auto q = NuclearCoords::from_polar(rho, phi);
        const auto a = jt_adiabatic(p, q);
        const auto es = eig_complex_symmetric(build_jt_diabatic(p, q));
        if (es.any_coalesced) continue;
        const double direct =
            std::abs(es.values[0] - a.v1) + std::abs(es.values[1] - a.v2);
        const double flipped =
            std::abs(es.values[0] - a.v2) + std::abs(es.values[1] - a.v1);
        CHECK(std::min(direct, flipped) < 1e-12 * std::abs(a.v1));
    }
}

TEST_CASE("pjt trace identity") {
    const auto p = h3_pjt2();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int i = 0; i < 50; ++i) {
        const auto q = NuclearCoords::from_cartesian(u(rng), u(rng));
        const auto es = eig_complex_symmetric(build_pjt_diabatic(p, q));
        const cdouble sum = es.values[0] + es.values[1] + es.values[2];
        const cdouble expect =
            3.0 * (0.5 * p.omega * q.rho * q.rho) + p.eps_A + 2.0 * p.eps_E;
        CHECK(std::abs(sum - expect) < 1e-12);
    }
}

TEST_CASE("degenerate diagonalizable pair keeps rigidity near one") {
    // The pjt matrix at the origin has an exactly degenerate but
    // diagonalizable E pair: a conical intersection, not an exceptional point.
    const auto es = eig_complex_symmetric(
        build_pjt_diabatic(h3_pjt2(), NuclearCoords::from_cartesian(0.0, 0.0)));
    CHECK(std::abs(es.values[0] - es.values[1]) < 1e-15);
    CHECK(es.rigidity[0] > 0.99);
    CHECK(es.rigidity[1] > 0.99);
    CHECK(!es.any_coalesced);
}

}  // TEST_SUITE

TEST_SUITE("eigensystem") {

TEST_CASE("non-finite matrices are rejected") {
    DiabaticMatrix m;
    m.dim = 2;
    m.m.setZero();
    m.m(0, 1) = std::nan("");
    m.m(1, 0) = std::nan("");
    CHECK_THROWS_AS(eig_complex_symmetric(m), DomainError);
}

}  // TEST_SUITE
