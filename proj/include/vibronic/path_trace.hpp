#pragma once

#include <vector>

#include "vibronic/eigensystem.hpp"
#include "vibronic/params.hpp"

namespace vibronic {

/// Eigenbranches followed continuously along an ordered list of geometries.
/// Slot i of branch_values / branch_vectors at every point is the
/// continuation of the branch that was slot i at the first point (ascending
/// real part there). Signs are smoothed so adjacent overlaps have positive
/// real part. For closed paths, permutation[i] names the starting branch
/// whose eigenvector slot i has flowed into after the full circuit.
struct PathTrace {
    int dim = 3;
    std::vector<NuclearCoords> points;
    std::vector<std::array<cdouble, 3>> branch_values;
    std::vector<Eigen::Matrix3cd> branch_vectors;
    std::array<int, 3> permutation{0, 1, 2};
    bool closed = false;
    double min_abs_overlap = 1.0;
};

/// Follows all eigenbranches along the path. Throws TrackingError (carrying
/// the offending segment) when the overlap assignment between two
/// consecutive points is ambiguous, i.e. the path needs refinement.
PathTrace track_along_path(const ModelParams& model, const std::vector<NuclearCoords>& points);

namespace detail {

/// Best branch assignment between two frames by total biorthogonal overlap.
/// Returns perm such that new column perm[i] continues old column i, along
/// with the smallest normalized diagonal overlap of that assignment.
struct Assignment {
    std::array<int, 3> perm{0, 1, 2};
    double min_normalized_overlap = 0.0;
};

Assignment assign_branches(const Eigen::Matrix3cd& prev, const Eigen::Matrix3cd& next, int dim);

}  // namespace detail

}  // namespace vibronic
