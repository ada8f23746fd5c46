#include "vibronic/eigensystem.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace vibronic {

namespace detail {

namespace {

using Vector2cld = Eigen::Matrix<cldouble, 2, 1>;

long double rigidity_of(const Vector3cld& v) {
    const cldouble vtv = v(0) * v(0) + v(1) * v(1) + v(2) * v(2);
    const long double vhv = std::norm(v(0)) + std::norm(v(1)) + std::norm(v(2));
    if (vhv == 0.0L) return 0.0L;
    return std::abs(vtv) / vhv;
}

long double rigidity_of(const Vector2cld& v) {
    const cldouble vtv = v(0) * v(0) + v(1) * v(1);
    const long double vhv = std::norm(v(0)) + std::norm(v(1));
    if (vhv == 0.0L) return 0.0L;
    return std::abs(vtv) / vhv;
}

cldouble det2(cldouble a, cldouble b, cldouble c, cldouble d) { return a * d - b * c; }

// Bilinear (non-conjugating) cross product; the result annihilates both rows
// under the complex symmetric inner product, which is what a null vector of a
// rank-2 complex matrix must satisfy.
Vector3cld cross_bilinear(const Vector3cld& a, const Vector3cld& b) {
    Vector3cld w;
    w(0) = a(1) * b(2) - a(2) * b(1);
    w(1) = a(2) * b(0) - a(0) * b(2);
    w(2) = a(0) * b(1) - a(1) * b(0);
    return w;
}

long double norm_inf(const Matrix3cld& m) {
    long double n = 0.0L;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) n = std::max(n, std::abs(m(i, j)));
    return n;
}

}  // namespace

std::array<cldouble, 3> eigenvalues_cardano(const Matrix3cld& m) {
    // Characteristic polynomial x^3 + a x^2 + b x + c.
    const cldouble a = -(m(0, 0) + m(1, 1) + m(2, 2));
    const cldouble b = det2(m(0, 0), m(0, 1), m(1, 0), m(1, 1)) +
                       det2(m(0, 0), m(0, 2), m(2, 0), m(2, 2)) +
                       det2(m(1, 1), m(1, 2), m(2, 1), m(2, 2));
    const cldouble c = -(m(0, 0) * det2(m(1, 1), m(1, 2), m(2, 1), m(2, 2)) -
                         m(0, 1) * det2(m(1, 0), m(1, 2), m(2, 0), m(2, 2)) +
                         m(0, 2) * det2(m(1, 0), m(1, 1), m(2, 0), m(2, 1)));

    // Depressed cubic y^3 + p y + q with x = y - a/3.
    const cldouble shift = a / 3.0L;
    const cldouble p = b - a * a / 3.0L;
    const cldouble q = 2.0L * a * a * a / 27.0L - a * b / 3.0L + c;

    std::array<cldouble, 3> roots;
    const cldouble w = std::sqrt(q * q / 4.0L + p * p * p / 27.0L);
    cldouble base = -q / 2.0L;
    // Pick the sign that avoids cancellation in the cube-root argument.
    base = (std::abs(base + w) >= std::abs(base - w)) ? base + w : base - w;
    if (std::abs(base) == 0.0L) {
        roots = {-shift, -shift, -shift};
    } else {
        const cldouble croot = std::pow(base, cldouble(1.0L / 3.0L));
        const cldouble omega(-0.5L, 0.8660254037844386467637231707529362L);
        cldouble wk = croot;
        for (int i = 0; i < 3; ++i) {
            roots[i] = wk - p / (3.0L * wk) - shift;
            wk *= omega;
        }
    }

    // One or two Newton steps, skipped near multiple roots where the
    // derivative degenerates.
    for (auto& x : roots) {
        for (int it = 0; it < 2; ++it) {
            const cldouble f = ((x + a) * x + b) * x + c;
            const cldouble fp = (3.0L * x + 2.0L * a) * x + b;
            if (std::abs(fp) < 1e-12L * (std::abs(x) * std::abs(x) + std::abs(b)) ||
                std::abs(fp) == 0.0L) {
                break;
            }
            x -= f / fp;
        }
    }
    return roots;
}

PairAnalysis analyze_pair_2x2(const Matrix2cld& m) {
    PairAnalysis out;
    const cldouble mean = (m(0, 0) + m(1, 1)) / 2.0L;
    const cldouble beta = (m(0, 0) - m(1, 1)) / 2.0L;
    const cldouble disc = beta * beta + m(0, 1) * m(1, 0);
    const cldouble s = std::sqrt(disc);
    out.value_a = mean - s;
    out.value_b = mean + s;
    out.gap = 2.0L * std::abs(s);
    out.pair_discriminant = 4.0L * disc;
    out.pair = {0, 1};

    const long double scale = std::abs(beta) + std::abs(m(0, 1)) + std::abs(m(1, 0));
    if (scale == 0.0L || (std::abs(m(0, 1)) + std::abs(m(1, 0))) < 1e-30L * scale) {
        // (Near-)diagonal block: eigenvectors are the basis vectors.
        out.rigidity_a = 1.0L;
        out.rigidity_b = 1.0L;
        return out;
    }

    // Null-vector candidates of (m - lambda I), larger-norm form wins.
    const auto eigvec = [&](cldouble s_signed) {
        Vector2cld va, vb;
        va << beta + s_signed, m(1, 0);
        vb << -m(0, 1), beta - s_signed;
        const long double na = std::norm(va(0)) + std::norm(va(1));
        const long double nb = std::norm(vb(0)) + std::norm(vb(1));
        return (na >= nb) ? va : vb;
    };
    out.rigidity_a = rigidity_of(eigvec(-s));
    out.rigidity_b = rigidity_of(eigvec(s));
    return out;
}

PairAnalysis analyze_closest_pair(const Matrix3cld& m_in) {
    const std::array<cldouble, 3> ev = eigenvalues_cardano(m_in);

    // Closest pair by modulus of the difference.
    int ia = 0, ib = 1, ic = 2;
    long double best = std::abs(ev[0] - ev[1]);
    if (std::abs(ev[0] - ev[2]) < best) { best = std::abs(ev[0] - ev[2]); ia = 0; ib = 2; ic = 1; }
    if (std::abs(ev[1] - ev[2]) < best) { ia = 1; ib = 2; ic = 0; }

    const cldouble mu = (ev[ia] + ev[ib]) / 2.0L;
    Matrix3cld m = m_in;
    for (int i = 0; i < 3; ++i) m(i, i) -= mu;
    const cldouble far = ev[ic] - mu;

    PairAnalysis out;
    out.other = ev[ic];
    out.pair = {ia, ib};

    const long double scale = norm_inf(m);
    if (scale == 0.0L) {
        out.value_a = mu;
        out.value_b = mu;
        out.rigidity_a = out.rigidity_b = 1.0L;
        return out;
    }

    // Eigenvector of the well-separated third state from row cross products.
    Matrix3cld afar = m;
    for (int i = 0; i < 3; ++i) afar(i, i) -= far;
    Vector3cld u3;
    long double nbest = -1.0L;
    for (int r1 = 0; r1 < 3; ++r1) {
        for (int r2 = r1 + 1; r2 < 3; ++r2) {
            const Vector3cld w =
                cross_bilinear(afar.row(r1).transpose(), afar.row(r2).transpose());
            const long double n = std::sqrt(std::norm(w(0)) + std::norm(w(1)) + std::norm(w(2)));
            if (n > nbest) { nbest = n; u3 = w; }
        }
    }
    if (nbest <= 0.0L) {
        // Matrix proportional to identity after the shift; fully degenerate.
        out.value_a = mu;
        out.value_b = mu;
        out.rigidity_a = out.rigidity_b = 1.0L;
        return out;
    }
    u3 /= std::sqrt(std::norm(u3(0)) + std::norm(u3(1)) + std::norm(u3(2)));

    // Unitary completion of u3: modified Gram-Schmidt on the two basis
    // vectors with the smallest overlap against u3.
    int drop = 0;
    long double amax = std::abs(u3(0));
    for (int i = 1; i < 3; ++i)
        if (std::abs(u3(i)) > amax) { amax = std::abs(u3(i)); drop = i; }
    Eigen::Matrix<cldouble, 3, 2> q2;
    int col = 0;
    for (int i = 0; i < 3; ++i) {
        if (i == drop) continue;
        Vector3cld e = Vector3cld::Zero();
        e(i) = 1.0L;
        for (int pass = 0; pass < 2; ++pass) {
            e -= (u3.adjoint() * e)(0) * u3;
            for (int jc = 0; jc < col; ++jc) {
                e -= (q2.col(jc).adjoint() * e)(0) * Vector3cld(q2.col(jc));
            }
        }
        e /= std::sqrt(std::norm(e(0)) + std::norm(e(1)) + std::norm(e(2)));
        q2.col(col++) = e;
    }

    // Block triangularization: pair spectrum lives in b2 = q2^dag m q2.
    const Eigen::Matrix<cldouble, 3, 2> mq2 = m * q2;
    Matrix2cld b2 = q2.adjoint() * mq2;
    const Eigen::Matrix<cldouble, 1, 2> r = u3.adjoint() * mq2;

    const PairAnalysis sub = analyze_pair_2x2(b2);
    out.gap = sub.gap;
    out.pair_discriminant = sub.pair_discriminant;
    out.value_a = sub.value_a + mu;
    out.value_b = sub.value_b + mu;

    // Lift 2x2 eigenvectors back to 3 components, including the admixture of
    // the third state through the (well-conditioned) coupling row r.
    const cldouble mean = (b2(0, 0) + b2(1, 1)) / 2.0L;
    const cldouble beta = (b2(0, 0) - b2(1, 1)) / 2.0L;
    const cldouble s = std::sqrt(beta * beta + b2(0, 1) * b2(1, 0));
    const long double offscale = std::abs(b2(0, 1)) + std::abs(b2(1, 0));
    const auto lift = [&](cldouble s_signed) {
        Vector2cld w;
        if (offscale < 1e-30L * (std::abs(beta) + offscale) || (std::abs(beta) + offscale) == 0.0L) {
            w << (s_signed == s ? 1.0L : 0.0L), (s_signed == s ? 0.0L : 1.0L);
        } else {
            Vector2cld wa, wb;
            wa << beta + s_signed, b2(1, 0);
            wb << -b2(0, 1), beta - s_signed;
            w = (std::norm(wa(0)) + std::norm(wa(1)) >= std::norm(wb(0)) + std::norm(wb(1))) ? wa
                                                                                             : wb;
        }
        const cldouble lam = mean + s_signed;
        const cldouble denom = lam - far;
        Vector3cld v = q2 * w;
        if (std::abs(denom) > 0.0L) {
            const cldouble a3 = (r(0, 0) * w(0) + r(0, 1) * w(1)) / denom;
            v += a3 * u3;
        }
        return v;
    };
    out.rigidity_a = rigidity_of(lift(-s));
    out.rigidity_b = rigidity_of(lift(s));
    return out;
}

}  // namespace detail

int pair_index(int i, int j) {
    if (i > j) std::swap(i, j);
    if (i == 0 && j == 1) return 0;
    if (i == 0 && j == 2) return 1;
    return 2;
}

namespace {

double rigidity_of_column(const Eigen::Vector3cd& v, int dim) {
    cdouble vtv{};
    double vhv = 0.0;
    for (int i = 0; i < dim; ++i) {
        vtv += v(i) * v(i);
        vhv += std::norm(v(i));
    }
    if (vhv == 0.0) return 0.0;
    return std::abs(vtv) / vhv;
}

// Deterministic sign convention: the largest-magnitude component gets a
// positive real part (imaginary part breaks ties).
void canonical_sign(Eigen::Vector3cd& v, int dim) {
    int imax = 0;
    double amax = 0.0;
    for (int i = 0; i < dim; ++i) {
        if (std::abs(v(i)) > amax) { amax = std::abs(v(i)); imax = i; }
    }
    if (amax == 0.0) return;
    const cdouble z = v(imax);
    const bool flip = (z.real() < 0.0) || (z.real() == 0.0 && z.imag() < 0.0);
    if (flip) v.head(dim) = -v.head(dim);
}

}  // namespace

Eigensystem eig_complex_symmetric(const DiabaticMatrix& m) {
    if (m.dim != 2 && m.dim != 3) {
        throw DomainError("eig_complex_symmetric: dim must be 2 or 3");
    }
    const int n = m.dim;
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (!is_finite(m.m(i, j))) {
                throw DomainError("eig_complex_symmetric: non-finite matrix entry");
            }
            scale = std::max(scale, std::abs(m.m(i, j)));
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double asym = std::abs(m.m(i, j) - m.m(j, i));
            if (asym > 1e-12 * std::max(scale, 1e-300)) {
                throw DomainError("eig_complex_symmetric: matrix is not symmetric");
            }
        }
    }

    Eigensystem out;
    out.dim = n;

    std::array<cdouble, 3> vals{};
    Eigen::Matrix3cd vecs = Eigen::Matrix3cd::Zero();
    if (n == 2) {
        const cdouble mean = (m.m(0, 0) + m.m(1, 1)) / 2.0;
        const cdouble beta = (m.m(0, 0) - m.m(1, 1)) / 2.0;
        const cdouble s = std::sqrt(beta * beta + m.m(0, 1) * m.m(1, 0));
        vals[0] = mean - s;
        vals[1] = mean + s;
        const double offscale = std::abs(m.m(0, 1)) + std::abs(m.m(1, 0));
        if (offscale <= 1e-300 || offscale < 1e-18 * scale) {
            vecs(0, 0) = 1.0;
            vecs(1, 1) = 1.0;
            if (std::abs(vals[0] - m.m(0, 0)) > std::abs(vals[0] - m.m(1, 1))) {
                std::swap(vecs(0, 0), vecs(0, 1));
                std::swap(vecs(1, 0), vecs(1, 1));
            }
        } else {
            const auto fill = [&](int col, cdouble s_signed) {
                Eigen::Vector2cd va, vb;
                va << beta + s_signed, m.m(1, 0);
                vb << -m.m(0, 1), beta - s_signed;
                const Eigen::Vector2cd v =
                    (va.squaredNorm() >= vb.squaredNorm()) ? va : vb;
                vecs(0, col) = v(0);
                vecs(1, col) = v(1);
            };
            fill(0, -s);
            fill(1, s);
        }
    } else {
        Eigen::ComplexEigenSolver<Eigen::Matrix3cd> solver(m.m, true);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("eig_complex_symmetric: eigensolver failed");
        }
        for (int i = 0; i < 3; ++i) vals[i] = solver.eigenvalues()(i);
        vecs = solver.eigenvectors();
    }

    // Ascending real part (imaginary part as tiebreak for determinism).
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.begin() + n, [&](int a, int b) {
        if (vals[a].real() != vals[b].real()) return vals[a].real() < vals[b].real();
        return vals[a].imag() < vals[b].imag();
    });
    Eigen::Matrix3cd sorted_vecs = Eigen::Matrix3cd::Zero();
    std::array<cdouble, 3> sorted_vals{};
    for (int i = 0; i < n; ++i) {
        sorted_vals[i] = vals[order[i]];
        sorted_vecs.col(i) = vecs.col(order[i]);
    }
    out.values = sorted_vals;
    out.vectors = sorted_vecs;

    for (int i = 0; i < n; ++i) {
        out.rigidity[i] = rigidity_of_column(out.vectors.col(i), n);
    }

    // Close pairs get an extended-precision defectivity analysis; the plain
    // solver output cannot distinguish a true coalescence from roundoff.
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double gap = std::abs(out.values[i] - out.values[j]);
            if (gap > 1e-6 * std::max(scale, 1e-300)) continue;
            detail::PairAnalysis pa;
            if (n == 2) {
                detail::Matrix2cld m2;
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c) m2(r, c) = cldouble(m.m(r, c));
                pa = detail::analyze_pair_2x2(m2);
            } else {
                detail::Matrix3cld m3;
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 3; ++c) m3(r, c) = cldouble(m.m(r, c));
                pa = detail::analyze_closest_pair(m3);
            }
            const double ra = static_cast<double>(pa.rigidity_a);
            const double rb = static_cast<double>(pa.rigidity_b);
            // Assign the refined rigidities to the matching sorted slots.
            if (std::abs(cdouble(pa.value_a) - out.values[i]) +
                    std::abs(cdouble(pa.value_b) - out.values[j]) <=
                std::abs(cdouble(pa.value_a) - out.values[j]) +
                    std::abs(cdouble(pa.value_b) - out.values[i])) {
                out.rigidity[i] = ra;
                out.rigidity[j] = rb;
            } else {
                out.rigidity[i] = rb;
                out.rigidity[j] = ra;
            }
            if (out.rigidity[i] < kCoalescenceRigidity && out.rigidity[j] < kCoalescenceRigidity) {
                out.pair_coalesced[pair_index(i, j)] = true;
                out.any_coalesced = true;
            }
        }
    }

    // Biorthogonal normalization (skip coalesced pairs, where v^T v -> 0).
    for (int i = 0; i < n; ++i) {
        bool in_coalesced_pair = false;
        for (int j = 0; j < n; ++j) {
            if (j != i && out.pair_coalesced[pair_index(std::min(i, j), std::max(i, j))]) {
                in_coalesced_pair = true;
            }
        }
        Eigen::Vector3cd v = out.vectors.col(i);
        if (!in_coalesced_pair) {
            cdouble vtv{};
            for (int c = 0; c < n; ++c) vtv += v(c) * v(c);
            v.head(n) /= std::sqrt(vtv);
        }
        canonical_sign(v, n);
        out.vectors.col(i) = v;
    }
    return out;
}

}  // namespace vibronic
