#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "vibronic/path_trace.hpp"

using namespace vibronic;
using vibronic::testing::h3_pjt2;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<NuclearCoords> circle(double cx, double cy, double r, int n) {
    std::vector<NuclearCoords> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double a = 2.0 * kPi * i / n;
        pts.push_back(NuclearCoords::from_cartesian(cx + r * std::cos(a), cy + r * std::sin(a)));
    }
    return pts;
}
}  // namespace

TEST_SUITE("tracking") {

TEST_CASE("constant path gives the identity permutation") {
    const ModelParams m = h3_pjt2();
    std::vector<NuclearCoords> pts(8, NuclearCoords::from_cartesian(0.21, 0.13));
    const auto tr = track_along_path(m, pts);
    CHECK(tr.closed);
    CHECK(tr.permutation == std::array<int, 3>{0, 1, 2});
    CHECK(tr.min_abs_overlap > 0.99);
}

TEST_CASE("small arc not enclosing anything keeps branch labels") {
    const ModelParams m = h3_pjt2();
    std::vector<NuclearCoords> pts;
    for (int i = 0; i <= 60; ++i) {
        const double phi = 0.2 + 0.5 * i / 60.0;
        pts.push_back(NuclearCoords::from_polar(0.107, phi));
    }
    // Open path: values stay continuous and distinct.
    const auto tr = track_along_path(m, pts);
    CHECK(!tr.closed);
    for (std::size_t s = 1; s < tr.points.size(); ++s) {
        for (int b = 0; b < 3; ++b) {
            CHECK(std::abs(tr.branch_values[s][b] - tr.branch_values[s - 1][b]) < 2e-3);
        }
    }
}

TEST_CASE("closed loop around one exceptional point swaps the lower pair") {
    const ModelParams m = h3_pjt2();
    // Outer intersection of the lower two surfaces sits near
    // rho = 0.107, phi = 68.7 deg.
    const double phi0 = 68.68 * kPi / 180.0;
    const double cx = 0.107 * std::cos(phi0);
    const double cy = 0.107 * std::sin(phi0);
    const auto tr = track_along_path(m, circle(cx, cy, 0.01, 400));
    CHECK(tr.closed);
    CHECK(tr.permutation == std::array<int, 3>{1, 0, 2});
}

TEST_CASE("two loops around an exceptional point restore the identity") {
    const ModelParams m = h3_pjt2();
    const double phi0 = 68.68 * kPi / 180.0;
    const double cx = 0.107 * std::cos(phi0);
    const double cy = 0.107 * std::sin(phi0);
    auto once = circle(cx, cy, 0.01, 400);
    auto twice = once;
    twice.insert(twice.end(), once.begin() + 1, once.end());
    const auto tr = track_along_path(m, twice);
    CHECK(tr.closed);
    CHECK(tr.permutation == std::array<int, 3>{0, 1, 2});
}

TEST_CASE("single point paths are rejected") {
    const ModelParams m = h3_pjt2();
    std::vector<NuclearCoords> pts{NuclearCoords::from_cartesian(0.1, 0.1)};
    CHECK_THROWS_AS(track_along_path(m, pts), DomainError);
}

}  // TEST_SUITE
