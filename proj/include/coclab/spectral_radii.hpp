#pragma once

#include <span>

#include "coclab/operator.hpp"

namespace coclab {

// Certified bracket for the joint spectral radius of a finite operator set:
// lower = best spectral-radius rate found (a true lower bound for the
// generalized spectral radius), upper = a valid norm-based upper bound.
struct RadiusBounds {
    double lower = 0.0;
    double upper = 0.0;
    int depth_reached = 0;
    std::vector<int> witness_word; // indices into ops, product applied right-to-left
    std::vector<double> per_length_upper; // exhaustive only: max ||P||^{1/len} per length
};

// Full enumeration of products up to `depth` in lexicographic depth-first
// order. lower = max r(P)^{1/len}; upper = min over lengths of the per-length
// max norm rate.
RadiusBounds exhaustive_bounds(std::span<const Operator> ops, int depth,
                               NormKind kind = NormKind::l2_induced,
                               std::uint64_t budget = (std::uint64_t{1} << 20));

// Depth-first search with Gripenberg-style pruning: a prefix is not extended
// once the minimum of its prefix norm rates drops to lower + target_gap.
// Returns whichever certified bounds were achieved by max_depth.
RadiusBounds branch_and_bound(std::span<const Operator> ops, double target_gap, int max_depth,
                              NormKind kind = NormKind::l2_induced,
                              std::uint64_t node_budget = (std::uint64_t{1} << 22));

// (depth, upper - lower) per requested depth; the finite-dimensional foil to
// the infinite-dimensional strict gap.
std::vector<std::pair<int, double>> berger_wang_gap(std::span<const Operator> ops,
                                                    std::span<const int> depths,
                                                    NormKind kind = NormKind::l2_induced,
                                                    std::uint64_t budget = (std::uint64_t{1} << 20));

} // namespace coclab
