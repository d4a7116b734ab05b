#pragma once

#include <cstdint>
#include <vector>

#include "prompt.hpp"

namespace optiseq {

// Factorial growth turns silent blowups into errors: n! above this cap
// is rejected unless the caller raises it explicitly.
inline constexpr std::uint64_t kDefaultPermutationCap = 720;

std::uint64_t factorial(std::size_t n);

enum class PlanStrategy { exhaustive, anchored, single_topk, single_random };

struct OrderingPlan {
    std::vector<Ordering> orderings;
    PlanStrategy strategy = PlanStrategy::exhaustive;
};

/// All n! permutations of 0..n-1 in lexicographic order; rank = position.
OrderingPlan enumerate_orderings(std::size_t n,
                                 std::uint64_t permutation_cap = kDefaultPermutationCap);

/// Pins ranked_indices[0] first and enumerates the (n-1)! lexicographic
/// permutations of the remaining indices behind it.
OrderingPlan anchored_orderings(const std::vector<std::size_t>& ranked_indices,
                                std::uint64_t permutation_cap = kDefaultPermutationCap);

// Permutation of 0..n-1 at the given lexicographic rank (factoradic decode).
std::vector<std::size_t> unrank_permutation(std::size_t n, std::uint64_t rank);

} // namespace optiseq
