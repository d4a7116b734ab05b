#include "permute.hpp"

#include <algorithm>
#include <numeric>

namespace optiseq {

std::uint64_t factorial(std::size_t n) {
    if (n > 20) fail(Errc::cap_exceeded, std::to_string(n) + "! overflows 64 bits");
    std::uint64_t f = 1;
    for (std::size_t i = 2; i <= n; ++i) f *= i;
    return f;
}

namespace {

void check_cap(std::size_t n, std::uint64_t count, std::uint64_t cap) {
    if (count > cap)
        fail(Errc::cap_exceeded, "plan for " + std::to_string(n) + " examples needs " +
                                     std::to_string(count) +
                                     " orderings, above the permutation cap of " +
                                     std::to_string(cap));
}

} // namespace

OrderingPlan enumerate_orderings(std::size_t n, std::uint64_t permutation_cap) {
    if (n < 1) fail(Errc::invalid_argument, "cannot enumerate orderings of 0 examples");
    check_cap(n, factorial(n), permutation_cap);

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});

    OrderingPlan plan;
    plan.strategy = PlanStrategy::exhaustive;
    std::uint64_t rank = 0;
    do {
        plan.orderings.push_back({idx, {OrderingKind::exhaustive, rank++}});
    } while (std::next_permutation(idx.begin(), idx.end()));
    return plan;
}

OrderingPlan anchored_orderings(const std::vector<std::size_t>& ranked_indices,
                                std::uint64_t permutation_cap) {
    const std::size_t n = ranked_indices.size();
    if (n < 1) fail(Errc::invalid_argument, "cannot anchor an empty ranking");
    validate_ordering(ranked_indices, n);
    check_cap(n, factorial(n - 1), permutation_cap);

    std::vector<std::size_t> tail(ranked_indices.begin() + 1, ranked_indices.end());
    std::sort(tail.begin(), tail.end());

    OrderingPlan plan;
    plan.strategy = PlanStrategy::anchored;
    std::uint64_t rank = 0;
    do {
        std::vector<std::size_t> indices;
        indices.reserve(n);
        indices.push_back(ranked_indices[0]);
        indices.insert(indices.end(), tail.begin(), tail.end());
        plan.orderings.push_back({std::move(indices), {OrderingKind::anchored, rank++}});
    } while (std::next_permutation(tail.begin(), tail.end()));
    return plan;
}

std::vector<std::size_t> unrank_permutation(std::size_t n, std::uint64_t rank) {
    if (n < 1) fail(Errc::invalid_argument, "cannot unrank a permutation of 0 elements");
    if (rank >= factorial(n))
        fail(Errc::invalid_argument, "rank " + std::to_string(rank) + " out of range for " +
                                         std::to_string(n) + " elements");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::vector<std::size_t> out;
    out.reserve(n);
    for (std::size_t k = n; k > 0; --k) {
        std::uint64_t f = factorial(k - 1);
        std::size_t pick = static_cast<std::size_t>(rank / f);
        rank %= f;
        out.push_back(pool[pick]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return out;
}

} // namespace optiseq
