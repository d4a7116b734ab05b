#include <doctest.h>

#include <algorithm>
#include <set>

#include "permute.hpp"

using namespace optiseq;

TEST_CASE("three examples enumerate to the six lexicographic orderings") {
    OrderingPlan plan = enumerate_orderings(3);
    REQUIRE(plan.orderings.size() == 6);
    std::vector<std::vector<std::size_t>> expected = {
        {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(plan.orderings[i].indices == expected[i]);
        CHECK(plan.orderings[i].source.kind == OrderingKind::exhaustive);
        CHECK(plan.orderings[i].source.value == i);
    }
}

TEST_CASE("single example enumerates to one ordering") {
    OrderingPlan plan = enumerate_orderings(1);
    REQUIRE(plan.orderings.size() == 1);
    CHECK(plan.orderings[0].indices == std::vector<std::size_t>{0});
}

TEST_CASE("plan sizes match factorials and contain no duplicates") {
    for (std::size_t n = 1; n <= 6; ++n) {
        OrderingPlan plan = enumerate_orderings(n);
        CHECK(plan.orderings.size() == factorial(n));
        std::set<std::vector<std::size_t>> unique;
        for (const auto& o : plan.orderings) unique.insert(o.indices);
        CHECK(unique.size() == factorial(n));
    }
}

TEST_CASE("cap converts factorial blowups into errors") {
    CHECK_THROWS_AS(enumerate_orderings(7), Error);
    try {
        enumerate_orderings(7);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::cap_exceeded);
    }
    CHECK_NOTHROW(enumerate_orderings(7, 5040)); // explicit override
    CHECK_THROWS_AS(enumerate_orderings(0), Error);
}

TEST_CASE("anchored plan pins the top-ranked index") {
    OrderingPlan plan = anchored_orderings({2, 0, 1});
    REQUIRE(plan.orderings.size() == 2);
    CHECK(plan.orderings[0].indices == std::vector<std::size_t>{2, 0, 1});
    CHECK(plan.orderings[1].indices == std::vector<std::size_t>{2, 1, 0});
    CHECK(plan.orderings[0].source.kind == OrderingKind::anchored);
    CHECK(plan.orderings[1].source.value == 1);
}

TEST_CASE("anchored single example degenerates to the identity") {
    OrderingPlan plan = anchored_orderings({0});
    REQUIRE(plan.orderings.size() == 1);
    CHECK(plan.orderings[0].indices == std::vector<std::size_t>{0});
}

TEST_CASE("anchored tails cover all permutations of the rest") {
    for (std::size_t n = 2; n <= 5; ++n) {
        std::vector<std::size_t> ranked;
        for (std::size_t i = 0; i < n; ++i) ranked.push_back(n - 1 - i);
        OrderingPlan plan = anchored_orderings(ranked);
        CHECK(plan.orderings.size() == factorial(n - 1));
        std::set<std::vector<std::size_t>> tails;
        for (const auto& o : plan.orderings) {
            CHECK(o.indices.front() == ranked.front());
            tails.insert({o.indices.begin() + 1, o.indices.end()});
        }
        CHECK(tails.size() == factorial(n - 1));
    }
}

TEST_CASE("anchored rejects non-permutations") {
    CHECK_THROWS_AS(anchored_orderings({0, 0, 1}), Error);
    CHECK_THROWS_AS(anchored_orderings({0, 3, 1}), Error);
    try {
        anchored_orderings({1, 1});
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_ordering);
    }
}

TEST_CASE("unrank matches enumeration order") {
    OrderingPlan plan = enumerate_orderings(4);
    for (std::size_t r = 0; r < plan.orderings.size(); ++r)
        CHECK(unrank_permutation(4, r) == plan.orderings[r].indices);
    CHECK_THROWS_AS(unrank_permutation(3, 6), Error);
}
