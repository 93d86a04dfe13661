#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "kcdyn/mapeq.hpp"
#include "oracles.hpp"

using namespace kcdyn;

namespace {

CoNetwork cycle4() { return oracle::make_graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, 1}}); }

}  // namespace

TEST_CASE("stationary flow normalizes strengths") {
    SUBCASE("4-cycle is uniform") {
        auto f = stationary_flow(cycle4());
        for (double p : f.node_flow) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
    }
    SUBCASE("path a-b-c") {
        auto f = stationary_flow(oracle::make_graph(3, {{0, 1, 1}, {1, 2, 1}}));
        CHECK(f.node_flow[0] == doctest::Approx(0.25));
        CHECK(f.node_flow[1] == doctest::Approx(0.5));
        CHECK(f.node_flow[2] == doctest::Approx(0.25));
        double mass = 0;
        for (const auto& e : f.edges) mass += e.weight;
        CHECK(mass == doctest::Approx(1.0));
    }
    SUBCASE("empty network") {
        auto f = stationary_flow(CoNetwork{});
        CHECK(f.node_flow.empty());
        CHECK(f.edges.empty());
    }
    SUBCASE("isolated node gets zero") {
        auto f = stationary_flow(oracle::make_graph(3, {{0, 1, 2}}));
        CHECK(f.node_flow[2] == 0.0);
        CHECK(f.node_flow[0] + f.node_flow[1] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("map equation values") {
    const auto g = cycle4();
    const auto flow = stationary_flow(g);
    const std::vector<std::uint32_t> one{0, 0, 0, 0};
    const std::vector<std::uint32_t> singles{0, 1, 2, 3};
    CHECK(map_equation(flow, one) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(map_equation(flow, singles) > 2.0 + 1e-9);
    CHECK(map_equation(flow, singles) == doctest::Approx(oracle::codelength(g, {0, 1, 2, 3})).epsilon(1e-12));

    const auto bb = oracle::barbell_k4();
    const auto bflow = stationary_flow(bb);
    const double two = map_equation(bflow, std::vector<std::uint32_t>{0, 0, 0, 0, 1, 1, 1, 1});
    const double single = map_equation(bflow, std::vector<std::uint32_t>(8, 0));
    CHECK(two < single);
    CHECK(two == doctest::Approx(oracle::codelength(bb, {0, 0, 0, 0, 1, 1, 1, 1})).epsilon(1e-12));

    CHECK_THROWS_AS(map_equation(flow, std::vector<std::uint32_t>{0, 0, 0}), std::invalid_argument);
}

TEST_CASE("single module codelength equals visit-rate entropy") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 9);
        const auto g = oracle::random_connected(rng, n, 0.3);
        const auto flow = stationary_flow(g);
        double h = 0;
        for (double p : flow.node_flow) h -= p * std::log2(p);
        CHECK(map_equation(flow, std::vector<std::uint32_t>(n, 7)) == doctest::Approx(h).epsilon(1e-12));
    }
}

TEST_CASE("library and oracle map equation agree on arbitrary partitions") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 7);
        const auto g = oracle::random_connected(rng, n, 0.4);
        std::vector<int> m(n);
        std::vector<std::uint32_t> mu(n);
        for (int i = 0; i < n; ++i) mu[i] = static_cast<std::uint32_t>(m[i] = static_cast<int>(rng() % 3));
        // oracle expects labels starting at 0 with no gaps beyond max; gaps are harmless there.
        CHECK(map_equation(stationary_flow(g), mu) == doctest::Approx(oracle::codelength(g, m)).epsilon(1e-12));
    }
}

TEST_CASE("detect_communities on named graphs") {
    SUBCASE("barbell separates the cliques") {
        auto p = detect_communities(oracle::barbell_k4(), {.seed = 1, .trials = 10});
        CHECK(p.module_count == 2);
        for (int i = 1; i < 4; ++i) CHECK(p.assignment[i] == p.assignment[0]);
        for (int i = 5; i < 8; ++i) CHECK(p.assignment[i] == p.assignment[4]);
        CHECK(p.assignment[0] != p.assignment[4]);
    }
    SUBCASE("triangle stays whole") {
        auto p = detect_communities(oracle::make_graph(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}));
        CHECK(p.module_count == 1);
        std::vector<int> best;
        oracle::exhaustive_min(oracle::make_graph(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}), &best);
        CHECK(best == std::vector<int>{0, 0, 0});
    }
    SUBCASE("edgeless graph gives singletons") {
        auto p = detect_communities(oracle::make_graph(3, {}));
        CHECK(p.module_count == 3);
        CHECK(p.assignment == std::vector<std::uint32_t>{0, 1, 2});
        CHECK(p.codelength == 0.0);
    }
    SUBCASE("empty network") {
        auto p = detect_communities(CoNetwork{});
        CHECK(p.module_count == 0);
        CHECK(p.assignment.empty());
    }
    SUBCASE("isolated nodes become their own modules") {
        auto g = oracle::make_graph(5, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}});
        auto p = detect_communities(g);
        CHECK(p.module_count == 3);
        CHECK(p.assignment[3] != p.assignment[4]);
        CHECK(p.assignment[3] != p.assignment[0]);
    }
    SUBCASE("disconnected cliques split into components") {
        auto g = oracle::make_graph(6, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}});
        auto p = detect_communities(g);
        CHECK(p.module_count == 2);
    }
    CHECK_THROWS_AS(detect_communities(cycle4(), {.seed = 0, .trials = 0}), std::invalid_argument);
}

TEST_CASE("detect_communities is bounded by trivial partitions and matches exhaustive search") {
    std::mt19937_64 rng(2024);
    int mismatches = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 7);
        const auto g = oracle::random_connected(rng, n, static_cast<double>(rng() % 60) / 100.0);
        const auto p = detect_communities(g, {.seed = static_cast<std::uint64_t>(trial), .trials = 10});
        const auto flow = stationary_flow(g);
        CHECK(p.codelength <= map_equation(flow, std::vector<std::uint32_t>(n, 0)) + 1e-12);
        std::vector<std::uint32_t> singles(n);
        std::iota(singles.begin(), singles.end(), 0u);
        CHECK(p.codelength <= map_equation(flow, singles) + 1e-12);
        CHECK(p.codelength == doctest::Approx(oracle::codelength(g, std::vector<int>(p.assignment.begin(), p.assignment.end()))).epsilon(1e-12));
        if (std::abs(p.codelength - oracle::exhaustive_min(g)) > 1e-9) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("partition invariants") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 20);
        const auto g = oracle::random_connected(rng, n, 0.15);
        const auto p = detect_communities(g, {.seed = 3, .trials = 5});
        REQUIRE(p.assignment.size() == static_cast<std::size_t>(n));
        std::vector<int> seen(p.module_count, 0);
        for (auto m : p.assignment) {
            REQUIRE(m < p.module_count);
            seen[m] = 1;
        }
        CHECK(std::accumulate(seen.begin(), seen.end(), 0) == static_cast<int>(p.module_count));

        SUBCASE("determinism") {
            const auto q = detect_communities(g, {.seed = 3, .trials = 5});
            CHECK(q.codelength == p.codelength);
            CHECK(q.assignment == p.assignment);
        }
        SUBCASE("relabeling nodes leaves the codelength unchanged") {
            std::vector<std::uint32_t> perm(n);
            std::iota(perm.begin(), perm.end(), 0u);
            for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng() % (i + 1)]);
            CoNetwork h = g;
            for (auto& e : h.edges) {
                e.a = perm[e.a];
                e.b = perm[e.b];
                if (e.a > e.b) std::swap(e.a, e.b);
            }
            std::vector<std::uint32_t> moved(n);
            for (int i = 0; i < n; ++i) moved[perm[i]] = p.assignment[i];
            CHECK(map_equation(stationary_flow(h), moved) == doctest::Approx(p.codelength).epsilon(1e-12));
        }
    }
}
