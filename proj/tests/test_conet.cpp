#include "doctest.h"

#include <map>
#include <random>

#include "kcdyn/conet.hpp"
#include "test_util.hpp"

using namespace kcdyn;

namespace {

std::map<std::pair<std::string, std::string>, double> edges_by_id(const Corpus& c, const CoNetwork& g) {
    std::map<std::pair<std::string, std::string>, double> out;
    for (const auto& e : g.edges) {
        auto a = c.work(g.nodes[e.a]).id, b = c.work(g.nodes[e.b]).id;
        if (a > b) std::swap(a, b);
        out[{a, b}] = e.weight;
    }
    return out;
}

void check_canonical(const CoNetwork& g) {
    for (const auto& e : g.edges) {
        CHECK(e.a < e.b);
        CHECK(e.b < g.nodes.size());
        CHECK(e.weight >= 1.0);
    }
}

}  // namespace

TEST_CASE("reference co-citation network") {
    Corpus::Builder b;
    for (auto r : {"r1", "r2", "r3", "r4"}) b.add_work(r, 1990);
    b.add_work("A", 2000);
    b.add_work("B", 2000);
    b.add_work("C", 2001);
    b.add_work("D", 2001);
    b.add_work("E", 2002);
    b.add_work("F", 2003);
    for (auto r : {"r1", "r2", "r3"}) b.add_reference("A", r);
    for (auto r : {"r3", "r4"}) b.add_reference("B", r);
    for (auto r : {"r1", "r2"}) {
        b.add_reference("C", r);
        b.add_reference("D", r);
    }
    b.add_reference("E", "r1");
    for (auto w : {"A", "B", "C", "D", "E", "F"}) b.add_authorship(w, "me");
    Corpus c = std::move(b).build();

    SUBCASE("pairs within each list") {
        auto net = build_reference_conet(c, "me", 2000);
        CHECK(net.graph.node_count() == 4);
        check_canonical(net.graph);
        using P = std::pair<std::string, std::string>;
        CHECK(edges_by_id(c, net.graph) == std::map<P, double>{{{"r1", "r2"}, 1.0},
                                                                {{"r1", "r3"}, 1.0},
                                                                {{"r2", "r3"}, 1.0},
                                                                {{"r3", "r4"}, 1.0}});
        // r3 is listed by both papers.
        const auto r3 = std::find(net.graph.nodes.begin(), net.graph.nodes.end(), *c.find_work("r3")) - net.graph.nodes.begin();
        CHECK(net.occurrences[r3] == 2);
    }
    SUBCASE("shared pair accumulates weight") {
        auto net = build_reference_conet(c, "me", 2001);
        REQUIRE(net.graph.edges.size() == 1);
        CHECK(net.graph.edges[0].weight == 2.0);
        auto flat = build_reference_conet(c, "me", 2001, {.weighted = false});
        CHECK(flat.graph.edges[0].weight == 1.0);
    }
    SUBCASE("single reference gives an isolated node") {
        auto net = build_reference_conet(c, "me", 2002);
        CHECK(net.graph.node_count() == 1);
        CHECK(net.graph.edges.empty());
    }
    SUBCASE("empty reference list and idle year") {
        CHECK(build_reference_conet(c, "me", 2003).graph.empty());
        CHECK(build_reference_conet(c, "me", 1995).graph.empty());
    }
    SUBCASE("unknown author") { CHECK_THROWS_AS(build_reference_conet(c, "nobody", 2000), CorpusError); }
}

TEST_CASE("reference network is independent of publication order") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<int>> lists(5);
        for (auto& l : lists)
            for (int k = 0; k < 4; ++k) l.push_back(static_cast<int>(rng() % 12));
        auto build = [&](const std::vector<int>& order) {
            Corpus::Builder b;
            for (int r = 0; r < 12; ++r) b.add_work("r" + std::to_string(r), 1990);
            for (int p : order) {
                b.add_work("p" + std::to_string(p), 2000);
                for (int r : lists[p]) b.add_reference("p" + std::to_string(p), "r" + std::to_string(r));
                b.add_authorship("p" + std::to_string(p), "me");
            }
            Corpus c = std::move(b).build();
            return edges_by_id(c, build_reference_conet(c, "me", 2000).graph);
        };
        CHECK(build({0, 1, 2, 3, 4}) == build({4, 2, 0, 3, 1}));
    }
}

TEST_CASE("forward network") {
    Corpus::Builder b;
    b.add_work("P1", 2000);
    b.add_work("P2", 2000);
    for (auto r : {"a", "b", "c", "d", "e"}) b.add_work(r, 1990);
    b.add_work("X", 2003);
    b.add_work("Y", 2004);
    b.add_work("Z", 2005);
    b.add_work("LATE", 2015);
    for (auto r : {"P1", "a", "b"}) b.add_reference("X", r);
    for (auto r : {"P1", "P2", "b", "c"}) b.add_reference("Y", r);
    for (auto r : {"P2", "d", "e"}) b.add_reference("Z", r);
    b.add_reference("LATE", "P1");
    b.add_authorship("P1", "me");
    b.add_authorship("P2", "me");
    Corpus c = std::move(b).build();

    auto net = build_forward_conet(c, "me", 2000, 10);
    check_canonical(net.graph);
    // Y cites both focal papers but appears once; LATE is outside the window.
    CHECK(net.graph.node_count() == 3);
    using P = std::pair<std::string, std::string>;
    CHECK(edges_by_id(c, net.graph) == std::map<P, double>{{{"X", "Y"}, 1.0}});
    std::map<std::string, int> years;
    for (std::size_t i = 0; i < net.graph.nodes.size(); ++i) years[c.work(net.graph.nodes[i]).id] = net.citing_year[i];
    CHECK(years == std::map<std::string, int>{{"X", 2003}, {"Y", 2004}, {"Z", 2005}});

    CHECK(build_forward_conet(c, "me", 2001, 10).graph.empty());
    CHECK(build_forward_conet(c, "me", 2000, 16).graph.node_count() == 4);
}

TEST_CASE("forward node count equals deduplicated citing events") {
    std::mt19937_64 rng(23);
    Corpus::Builder b;
    for (int i = 0; i < 4; ++i) {
        b.add_work("P" + std::to_string(i), 2000);
        b.add_authorship("P" + std::to_string(i), "me");
    }
    for (int i = 0; i < 30; ++i) {
        const std::string id = "C" + std::to_string(i);
        b.add_work(id, 2000 + static_cast<int>(rng() % 15));
        for (int k = 0; k < 3; ++k) b.add_reference(id, "P" + std::to_string(rng() % 4));
        for (int k = 0; k < 3; ++k) b.add_reference(id, "S" + std::to_string(rng() % 10));
    }
    Corpus c = std::move(b).build();
    std::set<WorkIndex> citers;
    for (int i = 0; i < 4; ++i)
        for (auto e : citing_events(c, "P" + std::to_string(i), 10).events) citers.insert(e.citer);
    auto net = build_forward_conet(c, "me", 2000, 10);
    CHECK(net.graph.node_count() == citers.size());
    check_canonical(net.graph);
}
