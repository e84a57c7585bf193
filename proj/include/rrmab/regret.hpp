#pragma once

// Regret accounting against the best single arm, allocation-vector values and
// the exhaustive search that certifies single-arm optimality on small
// instances.
//
// On a rising instance the best sequence of pulls is to play one arm
// throughout, so the static benchmark below is also the dynamic one.

#include <cstdint>
#include <vector>

#include "rrmab/algo.hpp"
#include "rrmab/env.hpp"

namespace rrmab {

struct RegretReport {
    double benchmark = 0.0;
    double achieved = 0.0;
    double pseudo_regret = 0.0;
    double realized_regret = 0.0;
    std::vector<std::int64_t> pulls;
};

struct AllocationVector {
    std::vector<std::int64_t> counts;

    std::int64_t total() const;
    bool single_arm() const;
};

struct GapPair {
    double intercept_gap = 0.0;   // b_i - b_j
    double normalized_gap = 0.0;  // (b_i - b_j) / (T + 1)
    double slope_gap = 0.0;       // L_i - L_j
};

/// Benchmark shared by the static and dynamic regret definitions.
double regret_benchmark(const BanditInstance& instance);

/// Throws std::invalid_argument when the trace does not have T steps or its
/// pull indices are not consecutive per arm.
RegretReport static_regret(const PolicyTrace& trace, const BanditInstance& instance);

/// sum_i L_i v_i (v_i + 1) / 2 + b_i v_i. Throws std::invalid_argument unless
/// the counts are non-negative, sum to T and have one entry per arm.
double allocation_value(const AllocationVector& v, const BanditInstance& instance);

struct BruteForceResult {
    double value = 0.0;
    AllocationVector best;            // first maximiser in lexicographic order
    bool single_arm_attains = false;  // some T * e_i reaches the maximum
    std::int64_t vectors_checked = 0;
};

/// Number of allocation vectors, C(T + K - 1, K - 1), saturating at `cap + 1`.
std::int64_t allocation_count(std::int64_t horizon, std::int64_t num_arms, std::int64_t cap);

/// Enumerates every allocation vector in lexicographic order. Throws
/// std::length_error when there are more than `cap` of them.
BruteForceResult brute_force_optimal(const BanditInstance& instance,
                                     std::int64_t cap = 1'000'000);

/// 0-based arms.
GapPair gaps(const BanditInstance& instance, std::size_t i, std::size_t j);

/// [16 sqrt(ln(2/delta)) / (2 dtilde + L-gap)]^(2/3) for suboptimal arm j
/// against the best arm; +infinity when the denominator is not positive.
double lemma10_bound(const BanditInstance& instance, std::size_t j, double delta);

/// Smallest multiple of four that is >= lemma10_bound.
double lemma10_round_limit(const BanditInstance& instance, std::size_t j, double delta);

/// sum_{j != i*} ceil(lemma10_bound(j)) * phi + 1. With the default delta of
/// 1/(2 phi K T^2), ln(2/delta) = ln(4 phi K T^2). +infinity if any arm ties
/// the best one in 2 dtilde + L-gap.
double theorem11_bound(const BanditInstance& instance, double delta);
double theorem11_bound(const BanditInstance& instance);

}  // namespace rrmab
