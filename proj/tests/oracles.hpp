#pragma once
// Test-only reference implementations. These deliberately avoid the library's
// code paths: textbook formulas, exhaustive enumeration, direct loops.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "kcdyn/conet.hpp"

namespace oracle {

/// L(M) = q H(Q) + sum_i p_i H(P^i), written the long way from visit rates.
inline double codelength(const kcdyn::CoNetwork& g, const std::vector<int>& modules) {
    const std::size_t n = g.nodes.size();
    double w_total = 0;
    std::vector<double> strength(n, 0.0);
    for (const auto& e : g.edges) {
        w_total += e.weight;
        strength[e.a] += e.weight;
        strength[e.b] += e.weight;
    }
    if (w_total == 0) return 0.0;
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = strength[i] / (2 * w_total);

    const int k = *std::max_element(modules.begin(), modules.end()) + 1;
    std::vector<double> exit(k, 0.0), inside(k, 0.0);
    for (const auto& e : g.edges)
        if (modules[e.a] != modules[e.b]) {
            exit[modules[e.a]] += e.weight / (2 * w_total);
            exit[modules[e.b]] += e.weight / (2 * w_total);
        }
    for (std::size_t i = 0; i < n; ++i) inside[modules[i]] += p[i];

    auto H = [](const std::vector<double>& xs) {
        double total = 0, h = 0;
        for (double x : xs) total += x;
        if (total <= 0) return 0.0;
        for (double x : xs)
            if (x > 0) h -= (x / total) * std::log2(x / total);
        return h;
    };
    double q = 0;
    for (double x : exit) q += x;
    double L = q * H(exit);
    for (int m = 0; m < k; ++m) {
        std::vector<double> parts{exit[m]};
        for (std::size_t i = 0; i < n; ++i)
            if (modules[i] == m) parts.push_back(p[i]);
        L += (exit[m] + inside[m]) * H(parts);
    }
    return L;
}

/// Minimum codelength over every set partition (restricted growth strings).
inline double exhaustive_min(const kcdyn::CoNetwork& g, std::vector<int>* argmin = nullptr) {
    const int n = static_cast<int>(g.nodes.size());
    std::vector<int> a(n, 0), maxp(n, 0);
    double best = 1e300;
    for (;;) {
        const double L = codelength(g, a);
        if (L < best) {
            best = L;
            if (argmin) *argmin = a;
        }
        int i = n - 1;
        while (i > 0 && a[i] == (i == 0 ? 0 : maxp[i - 1]) + 1) --i;
        if (i <= 0) break;
        ++a[i];
        maxp[i] = std::max(maxp[i - 1], a[i]);
        for (int j = i + 1; j < n; ++j) {
            a[j] = 0;
            maxp[j] = maxp[j - 1];
        }
    }
    return best;
}

inline kcdyn::CoNetwork make_graph(int n, const std::vector<std::tuple<int, int, double>>& edges) {
    kcdyn::CoNetwork g;
    for (int i = 0; i < n; ++i) g.nodes.push_back(static_cast<kcdyn::WorkIndex>(i));
    std::map<std::pair<int, int>, double> acc;
    for (auto [a, b, w] : edges) acc[{std::min(a, b), std::max(a, b)}] += w;
    for (auto [k, w] : acc)
        g.edges.push_back({static_cast<std::uint32_t>(k.first), static_cast<std::uint32_t>(k.second), w});
    return g;
}

/// Random connected graph: a random spanning tree plus extra edges, integer weights 1..3.
inline kcdyn::CoNetwork random_connected(std::mt19937_64& rng, int n, double extra_density) {
    std::vector<std::tuple<int, int, double>> edges;
    std::map<std::pair<int, int>, bool> seen;
    auto add = [&](int a, int b) {
        auto key = std::make_pair(std::min(a, b), std::max(a, b));
        if (a == b || seen[key]) return;
        seen[key] = true;
        edges.emplace_back(key.first, key.second, static_cast<double>(1 + rng() % 3));
    };
    for (int i = 1; i < n; ++i) add(i, static_cast<int>(rng() % i));
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (static_cast<double>(rng() % 1000) / 1000.0 < extra_density) add(a, b);
    return make_graph(n, edges);
}

/// Two K4 cliques {0..3} and {4..7} joined by the single edge 3-4.
inline kcdyn::CoNetwork barbell_k4() {
    std::vector<std::tuple<int, int, double>> e;
    for (int base : {0, 4})
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) e.emplace_back(base + i, base + j, 1.0);
    e.emplace_back(3, 4, 1.0);
    return make_graph(8, e);
}

/// KCP by direct interval search: every [i, j] bounded by highlight years, with
/// no internal gap longer than g and not extendable on either side, is a
/// maximal merged run. Sums highlight counts of those holding >= d.
inline double persistence(const std::vector<bool>& mask, int d, int g) {
    const int n = static_cast<int>(mask.size());
    if (n == 0) return 0.0;
    int total = 0;
    for (int i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        for (int j = i; j < n; ++j) {
            if (!mask[j]) continue;
            int count = 0, gap = 0;
            bool bridged = true;
            for (int t = i; t <= j; ++t) {
                if (mask[t]) {
                    ++count;
                    gap = 0;
                } else if (++gap > g) {
                    bridged = false;
                }
            }
            if (!bridged) continue;
            bool extends_left = false, extends_right = false;
            for (int t = i - 1; t >= 0 && t >= i - 1 - g; --t) extends_left |= mask[t];
            for (int t = j + 1; t < n && t <= j + 1 + g; ++t) extends_right |= mask[t];
            if (!extends_left && !extends_right && count >= d) total += count;
        }
    }
    return static_cast<double>(total) / n;
}

}  // namespace oracle
