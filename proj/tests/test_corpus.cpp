#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>

#include "kcdyn/corpus.hpp"
#include "test_util.hpp"

using namespace kcdyn;
namespace fs = std::filesystem;

TEST_CASE("load_corpus cross-links a small corpus") {
    test_util::TempDir dir("corpus_small");
    test_util::write_file(dir / "works.tsv", "work_id\tyear\tfield_id\nW1\t2000\tbio\nW2\t2001\tbio\nW3\t2002\t\n");
    test_util::write_file(dir / "references.tsv", "citing_work_id\tcited_work_id\nW2\tW1\nW3\tW1\n");
    test_util::write_file(dir / "authorships.tsv", "work_id\tauthor_id\nW1\tA\nW2\tA\nW3\tB\n");
    test_util::write_file(dir / "authors.tsv", "author_id\tname\nA\tMaria\nB\tJohn\n");

    auto [corpus, report] = load_corpus(CorpusPaths::in(dir));
    CHECK(corpus.works().size() == 3);
    CHECK(corpus.forward_count() == 2);
    CHECK(corpus.reference_count() == 2);
    CHECK(report.warning_count() == 0);
    const auto w1 = *corpus.find_work("W1");
    CHECK(corpus.citers(w1).size() == 2);
    CHECK_FALSE(corpus.work(*corpus.find_work("W3")).field.has_value());
    const auto& a = corpus.author("A");
    CHECK(a.name == "Maria");
    CHECK(a.first_year() == 2000);
    CHECK(a.last_year() == 2001);
    CHECK(a.span_years() == 2);
}

TEST_CASE("dangling references are retained as bare nodes") {
    test_util::TempDir dir("corpus_dangling");
    test_util::write_file(dir / "works.tsv", "work_id\tyear\tfield_id\nW1\t2000\t\n");
    test_util::write_file(dir / "references.tsv", "citing_work_id\tcited_work_id\nW1\tGHOST\n");
    test_util::write_file(dir / "authorships.tsv", "work_id\tauthor_id\nW1\tA\n");
    test_util::write_file(dir / "authors.tsv", "author_id\tname\nA\tx\n");
    auto [corpus, report] = load_corpus(CorpusPaths::in(dir));
    CHECK(report.dangling_references == 1);
    CHECK(report.warning_count() == 1);
    const auto ghost = corpus.find_work("GHOST");
    REQUIRE(ghost.has_value());
    CHECK(corpus.work(*ghost).bare);
    CHECK_FALSE(corpus.work(*ghost).year.has_value());
    CHECK(corpus.citers(*ghost).size() == 1);
}

TEST_CASE("ingest errors and skipped rows") {
    test_util::TempDir dir("corpus_errors");
    test_util::write_file(dir / "references.tsv", "citing_work_id\tcited_work_id\n");
    test_util::write_file(dir / "authorships.tsv", "work_id\tauthor_id\nW1\tA\nNOPE\tA\n");
    test_util::write_file(dir / "authors.tsv", "author_id\tname\n");

    SUBCASE("duplicate work id is fatal") {
        test_util::write_file(dir / "works.tsv", "work_id\tyear\tfield_id\nW1\t2000\t\nW1\t2001\t\n");
        CHECK_THROWS_AS(load_corpus(CorpusPaths::in(dir)), CorpusError);
    }
    SUBCASE("missing file is fatal and names the file") {
        test_util::write_file(dir / "works.tsv", "work_id\tyear\tfield_id\n");
        fs::remove(dir / "references.tsv");
        try {
            load_corpus(CorpusPaths::in(dir));
            FAIL("expected CorpusError");
        } catch (const CorpusError& e) {
            CHECK(std::string(e.what()).find("references.tsv") != std::string::npos);
        }
    }
    SUBCASE("unparsable and out-of-range years are counted") {
        test_util::write_file(dir / "works.tsv",
                              "work_id\tyear\tfield_id\nW1\t2000\t\nW2\tabc\t\nW3\t1850\t\nW4\t2001\n");
        auto [corpus, report] = load_corpus(CorpusPaths::in(dir));
        CHECK(corpus.works().size() == 1);
        CHECK(report.malformed_rows == 3);
        CHECK(report.orphan_authorships == 1);
        CHECK(report.unnamed_authors == 1);
    }
}

TEST_CASE("self references and duplicates are dropped at ingest") {
    Corpus::Builder b;
    b.add_work("W1", 2000);
    b.add_work("W2", 2000);
    CHECK_FALSE(b.add_reference("W1", "W1"));
    b.add_reference("W1", "W2");
    b.add_reference("W1", "W2");
    auto& report = b.report();
    Corpus c = std::move(b).build();
    CHECK(report.self_references == 1);
    CHECK(report.duplicate_references == 1);
    CHECK(c.work(0).references == std::vector<WorkIndex>{1});
}

TEST_CASE("forward index is the transpose of references") {
    std::mt19937_64 rng(7);
    Corpus::Builder b;
    for (int i = 0; i < 60; ++i) b.add_work("W" + std::to_string(i), 1990 + i % 20);
    for (int k = 0; k < 400; ++k) b.add_reference("W" + std::to_string(rng() % 60), "W" + std::to_string(rng() % 70));
    Corpus c = std::move(b).build();
    CHECK(c.forward_count() == c.reference_count());
    for (WorkIndex a = 0; a < c.works().size(); ++a) {
        CHECK(std::find(c.work(a).references.begin(), c.work(a).references.end(), a) == c.work(a).references.end());
        for (WorkIndex r : c.work(a).references) {
            auto cs = c.citers(r);
            CHECK(std::find(cs.begin(), cs.end(), a) != cs.end());
        }
    }
}

TEST_CASE("write_corpus round-trips") {
    test_util::TempDir dir("corpus_roundtrip");
    std::mt19937_64 rng(3);
    Corpus::Builder b;
    for (int i = 0; i < 40; ++i)
        b.add_work("W" + std::to_string(i), 1970 + static_cast<int>(rng() % 30),
                   i % 3 ? std::optional<std::string>("f" + std::to_string(i % 4)) : std::nullopt);
    for (int k = 0; k < 150; ++k) b.add_reference("W" + std::to_string(rng() % 45), "W" + std::to_string(rng() % 50));
    for (int k = 0; k < 60; ++k) b.add_authorship("W" + std::to_string(rng() % 40), "A" + std::to_string(rng() % 8));
    b.add_author("A1", "Anna");
    b.add_author("Z", "Zed");
    Corpus original = std::move(b).build();

    write_corpus(original, dir.path());
    auto [reloaded, report] = load_corpus(CorpusPaths::in(dir));

    auto refs_by_id = [](const Corpus& c) {
        std::map<std::string, std::set<std::string>> out;
        for (const auto& w : c.works())
            for (auto r : w.references) out[w.id].insert(c.work(r).id);
        return out;
    };
    auto fwd_by_id = [](const Corpus& c) {
        std::map<std::string, std::set<std::string>> out;
        for (WorkIndex i = 0; i < c.works().size(); ++i)
            for (auto x : c.citers(i)) out[c.work(i).id].insert(c.work(x).id);
        return out;
    };
    auto meta = [](const Corpus& c) {
        std::map<std::string, std::tuple<std::optional<int>, std::optional<std::string>, bool>> out;
        for (const auto& w : c.works()) out[w.id] = {w.year, w.field, w.bare};
        return out;
    };
    auto careers = [](const Corpus& c) {
        std::map<std::string, std::pair<std::string, std::map<int, std::set<std::string>>>> out;
        for (const auto& a : c.authors()) {
            auto& slot = out[a.id];
            slot.first = a.name;
            for (const auto& [y, ws] : a.works_by_year)
                for (auto w : ws) slot.second[y].insert(c.work(w).id);
        }
        return out;
    };
    CHECK(meta(original) == meta(reloaded));
    CHECK(refs_by_id(original) == refs_by_id(reloaded));
    CHECK(fwd_by_id(original) == fwd_by_id(reloaded));
    CHECK(careers(original) == careers(reloaded));
}

TEST_CASE("filter_eligible") {
    Corpus::Builder b;
    auto add_career = [&](const std::string& author, int first, int last) {
        b.add_work(author + "_first", first);
        b.add_work(author + "_last", last);
        b.add_authorship(author + "_first", author);
        b.add_authorship(author + "_last", author);
    };
    add_career("exact10", 1970, 1979);
    add_career("short", 1970, 1978);
    add_career("early", 1959, 1990);
    add_career("late_ok", 2010, 2020);
    add_career("too_late", 2011, 2030);
    b.add_author("nothing", "n");
    Corpus c = std::move(b).build();

    const EligibilityCriteria def;
    CHECK(filter_eligible(c, def) == std::vector<std::string>{"exact10", "late_ok"});

    CHECK_THROWS_AS(filter_eligible(c, {.min_span = 0}), std::invalid_argument);
    CHECK_THROWS_AS(filter_eligible(c, {.min_span = 1, .start_lo = 2000, .start_hi = 1990}), std::invalid_argument);

    // Raising min_span never adds authors.
    std::size_t prev = SIZE_MAX;
    for (int span = 1; span <= 40; ++span) {
        auto n = filter_eligible(c, {.min_span = span}).size();
        CHECK(n <= prev);
        prev = n;
    }
}

TEST_CASE("citing_events window bounds") {
    Corpus::Builder b;
    b.add_work("P", 2000);
    b.add_work("C1999", 1999);
    b.add_work("C2005", 2005);
    b.add_work("C2010", 2010);
    b.add_work("C2000", 2000);
    b.add_work("LONELY", 2000);
    for (auto c : {"C1999", "C2005", "C2010", "C2000"}) b.add_reference(c, "P");
    b.add_reference("NOYEAR", "P");
    Corpus c = std::move(b).build();

    SUBCASE("ten-year window covers [t, t+9]") {
        auto ev = citing_events(c, "P", 10);
        std::set<std::string> ids;
        for (auto e : ev.events) ids.insert(c.work(e.citer).id);
        CHECK(ids == std::set<std::string>{"C2000", "C2005"});
        CHECK(ev.unknown_year == 1);
    }
    SUBCASE("window 1 is the publication year only") {
        auto ev = citing_events(c, "P", 1);
        REQUIRE(ev.events.size() == 1);
        CHECK(c.work(ev.events[0].citer).id == "C2000");
        CHECK(ev.events[0].year == 2000);
    }
    SUBCASE("window 11 reaches t+10") { CHECK(citing_events(c, "P", 11).events.size() == 3); }
    SUBCASE("uncited work") { CHECK(citing_events(c, "LONELY", 10).events.empty()); }
    SUBCASE("errors") {
        CHECK_THROWS_AS(citing_events(c, "MISSING", 10), CorpusError);
        CHECK_THROWS_AS(citing_events(c, "NOYEAR", 10), CorpusError);
        CHECK_THROWS_AS(citing_events(c, "P", 0), std::invalid_argument);
    }
}
