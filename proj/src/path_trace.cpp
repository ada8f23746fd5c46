#include "vibronic/path_trace.hpp"

#include <algorithm>
#include <cmath>

#include "vibronic/diabatic.hpp"

namespace vibronic {

namespace detail {

Assignment assign_branches(const Eigen::Matrix3cd& prev, const Eigen::Matrix3cd& next, int dim) {
    // Biorthogonal overlaps |v_i^T w_j| decide the assignment; the ambiguity
    // test uses unit-normalized (Hermitian) overlaps, which stay bounded near
    // coalescence where v^T v -> 0.
    double biortho[3][3] = {};
    double normalized[3][3] = {};
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            cdouble o{};
            cdouble oh{};
            double ni = 0.0, nj = 0.0;
            for (int r = 0; r < dim; ++r) {
                o += prev(r, i) * next(r, j);
                oh += std::conj(prev(r, i)) * next(r, j);
                ni += std::norm(prev(r, i));
                nj += std::norm(next(r, j));
            }
            biortho[i][j] = std::abs(o);
            normalized[i][j] = std::abs(oh) / std::sqrt(ni * nj);
        }
    }

    std::array<int, 3> idx{0, 1, 2};
    Assignment best;
    double best_score = -1.0;
    std::array<int, 3> perm = idx;
    std::sort(perm.begin(), perm.begin() + dim);
    do {
        double score = 0.0;
        double minn = 1.0;
        for (int i = 0; i < dim; ++i) {
            score += biortho[i][perm[i]];
            minn = std::min(minn, normalized[i][perm[i]]);
        }
        if (score > best_score) {
            best_score = score;
            best.perm = perm;
            best.min_normalized_overlap = minn;
        }
    } while (std::next_permutation(perm.begin(), perm.begin() + dim));
    return best;
}

}  // namespace detail

PathTrace track_along_path(const ModelParams& model, const std::vector<NuclearCoords>& points) {
    if (points.size() < 2) {
        throw DomainError("track_along_path: need at least 2 points");
    }
    const int dim = model_dim(model);

    PathTrace trace;
    trace.dim = dim;
    trace.points = points;
    trace.branch_values.reserve(points.size());
    trace.branch_vectors.reserve(points.size());

    Eigensystem start = eig_complex_symmetric(build_diabatic(model, points.front()));
    trace.branch_values.push_back(start.values);
    trace.branch_vectors.push_back(start.vectors);

    Eigen::Matrix3cd prev = start.vectors;
    for (std::size_t s = 1; s < points.size(); ++s) {
        const Eigensystem es = eig_complex_symmetric(build_diabatic(model, points[s]));
        if (es.any_coalesced) {
            throw TrackingError(
                "track_along_path: path passes through a coalescence at segment " +
                    std::to_string(s - 1),
                s - 1);
        }
        const auto a = detail::assign_branches(prev, es.vectors, dim);
        if (a.min_normalized_overlap <= 0.5) {
            throw TrackingError(
                "track_along_path: ambiguous branch assignment at segment " +
                    std::to_string(s - 1) + " (overlap " +
                    std::to_string(a.min_normalized_overlap) + "); refine the path",
                s - 1);
        }
        Eigen::Matrix3cd cur = Eigen::Matrix3cd::Zero();
        std::array<cdouble, 3> vals{};
        for (int i = 0; i < dim; ++i) {
            Eigen::Vector3cd w = es.vectors.col(a.perm[i]);
            cdouble overlap{};
            for (int r = 0; r < dim; ++r) overlap += prev(r, i) * w(r);
            if (overlap.real() < 0.0) w = -w;
            cur.col(i) = w;
            vals[i] = es.values[a.perm[i]];
        }
        trace.min_abs_overlap = std::min(trace.min_abs_overlap, a.min_normalized_overlap);
        trace.branch_values.push_back(vals);
        trace.branch_vectors.push_back(cur);
        prev = cur;
    }

    trace.closed = distance(points.front(), points.back()) < 1e-12;
    if (trace.closed) {
        // Match the final frame back onto the starting one.
        const auto a = detail::assign_branches(trace.branch_vectors.back(), start.vectors, dim);
        // assign_branches maps "slot i of end frame" -> start column perm[i]:
        // that start column is the physical branch the tracked slot ended on.
        for (int i = 0; i < dim; ++i) trace.permutation[i] = a.perm[i];
    }
    return trace;
}

}  // namespace vibronic
