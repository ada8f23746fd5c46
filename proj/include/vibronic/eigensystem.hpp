#pragma once

#include <array>

#include <Eigen/Core>

#include "vibronic/diabatic.hpp"
#include "vibronic/types.hpp"

namespace vibronic {

/// Phase rigidity below which a pair of eigenvectors is declared coalesced.
inline constexpr double kCoalescenceRigidity = 1e-8;

/// Biorthogonal eigendecomposition of a complex symmetric matrix.
/// values are sorted by ascending real part; vectors holds the right
/// eigenvectors as columns, normalized to v^T v = 1 except for coalesced
/// pairs, which are left unnormalized (their rigidity vanishes). The left
/// eigenvector matrix is vectors.transpose(). rigidity stores per-state
/// |v^T v| / (v^dag v) evaluated before renormalization.
struct Eigensystem {
    int dim = 3;
    std::array<cdouble, 3> values{};
    Eigen::Matrix3cd vectors = Eigen::Matrix3cd::Identity();
    std::array<double, 3> rigidity{1.0, 1.0, 1.0};
    // pair_coalesced[k] refers to the pair (0,1), (0,2), (1,2) for k = 0,1,2.
    std::array<bool, 3> pair_coalesced{false, false, false};
    bool any_coalesced = false;
};

/// Index into pair_coalesced for states (i, j), i < j.
int pair_index(int i, int j);

Eigensystem eig_complex_symmetric(const DiabaticMatrix& m);

namespace detail {

using Matrix3cld = Eigen::Matrix<cldouble, 3, 3>;
using Matrix2cld = Eigen::Matrix<cldouble, 2, 2>;
using Vector3cld = Eigen::Matrix<cldouble, 3, 1>;

/// Roots of the characteristic polynomial, extended precision, Newton-polished.
std::array<cldouble, 3> eigenvalues_cardano(const Matrix3cld& m);

/// Extended-precision analysis of the two closest eigenvalues of a complex
/// symmetric matrix: pair values, their gap, the phase rigidity of the pair
/// eigenvectors, and the complex discriminant of the deflated 2x2 block
/// (zero exactly at a two-state degeneracy).
struct PairAnalysis {
    cldouble value_a{};
    cldouble value_b{};
    cldouble other{};
    long double gap = 0.0L;
    long double rigidity_a = 1.0L;
    long double rigidity_b = 1.0L;
    cldouble pair_discriminant{};
    std::array<int, 2> pair{0, 1};
};

PairAnalysis analyze_closest_pair(const Matrix3cld& m);
PairAnalysis analyze_pair_2x2(const Matrix2cld& m);

}  // namespace detail

}  // namespace vibronic
