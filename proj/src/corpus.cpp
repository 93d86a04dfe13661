#include "kcdyn/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "kcdyn/tsv.hpp"

namespace kcdyn {

namespace {

constexpr std::size_t kMaxMessages = 20;

void note(LoadReport& report, std::string msg) {
    if (report.messages.size() < kMaxMessages) report.messages.push_back(std::move(msg));
}

std::string where(const tsv::Reader& r) {
    return r.path().filename().string() + ":" + std::to_string(r.line_number());
}

}  // namespace

std::span<const WorkIndex> AuthorCareer::works_in(int year) const {
    auto it = works_by_year.find(year);
    if (it == works_by_year.end()) return {};
    return it->second;
}

std::optional<WorkIndex> Corpus::find_work(std::string_view id) const {
    auto it = work_ids_.find(std::string(id));
    if (it == work_ids_.end()) return std::nullopt;
    return it->second;
}

const AuthorCareer* Corpus::find_author(std::string_view id) const {
    auto it = author_ids_.find(std::string(id));
    return it == author_ids_.end() ? nullptr : &authors_[it->second];
}

const AuthorCareer& Corpus::author(std::string_view id) const {
    if (const auto* a = find_author(id)) return *a;
    throw CorpusError("unknown author '" + std::string(id) + "'");
}

std::size_t Corpus::forward_count() const {
    return std::accumulate(forward_.begin(), forward_.end(), std::size_t{0},
                           [](std::size_t acc, const auto& v) { return acc + v.size(); });
}

WorkIndex Corpus::Builder::intern(std::string_view id, bool& created) {
    auto [it, inserted] = corpus_.work_ids_.try_emplace(std::string(id), static_cast<WorkIndex>(corpus_.works_.size()));
    created = inserted;
    if (inserted) {
        Work w;
        w.id = std::string(id);
        w.bare = true;
        corpus_.works_.push_back(std::move(w));
        refs_.emplace_back();
    }
    return it->second;
}

WorkIndex Corpus::Builder::add_work(std::string_view id, int year, std::optional<std::string> field) {
    if (year < kMinYear || year > kMaxYear)
        throw CorpusError("work '" + std::string(id) + "': year " + std::to_string(year) + " out of range");
    bool created = false;
    const WorkIndex w = intern(id, created);
    Work& work = corpus_.works_[w];
    if (!created && !work.bare) throw CorpusError("duplicate work_id '" + std::string(id) + "'");
    work.bare = false;
    work.year = year;
    work.field = std::move(field);
    return w;
}

bool Corpus::Builder::add_reference(std::string_view citing, std::string_view cited) {
    if (citing == cited) {
        ++report_.self_references;
        return false;
    }
    bool created_citing = false, created_cited = false;
    const WorkIndex a = intern(citing, created_citing);
    const WorkIndex b = intern(cited, created_cited);
    if (corpus_.works_[a].bare || corpus_.works_[b].bare) ++report_.dangling_references;
    refs_[a].push_back(b);
    return true;
}

bool Corpus::Builder::add_authorship(std::string_view work_id, std::string_view author_id) {
    auto w = corpus_.find_work(work_id);
    if (!w || corpus_.works_[*w].bare) {
        ++report_.orphan_authorships;
        return false;
    }
    auto it = authored_.find(author_id);
    if (it == authored_.end()) it = authored_.emplace(std::string(author_id), std::vector<WorkIndex>{}).first;
    it->second.push_back(*w);
    return true;
}

void Corpus::Builder::add_author(std::string_view author_id, std::string_view name) {
    names_.insert_or_assign(std::string(author_id), std::string(name));
}

Corpus Corpus::Builder::build() && {
    const std::size_t n = corpus_.works_.size();
    corpus_.forward_.assign(n, {});
    corpus_.reference_count_ = 0;
    for (std::size_t a = 0; a < n; ++a) {
        auto& r = refs_[a];
        std::sort(r.begin(), r.end());
        const auto before = r.size();
        r.erase(std::unique(r.begin(), r.end()), r.end());
        report_.duplicate_references += before - r.size();
        for (WorkIndex b : r) corpus_.forward_[b].push_back(static_cast<WorkIndex>(a));
        corpus_.reference_count_ += r.size();
        corpus_.works_[a].references = std::move(r);
    }
    // forward_ lists are filled in ascending citer order already.

    std::map<std::string, AuthorCareer, std::less<>> careers;
    for (const auto& [id, name] : names_) {
        auto& c = careers[id];
        c.id = id;
        c.name = name;
    }
    for (auto& [id, works] : authored_) {
        auto [it, inserted] = careers.try_emplace(id);
        if (inserted) {
            it->second.id = id;
            ++report_.unnamed_authors;
        }
        for (WorkIndex w : works) it->second.works_by_year[*corpus_.works_[w].year].push_back(w);
    }
    corpus_.authors_.clear();
    corpus_.author_ids_.clear();
    for (auto& [id, career] : careers) {
        for (auto& [year, ws] : career.works_by_year) {
            std::sort(ws.begin(), ws.end());
            ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
        }
        corpus_.author_ids_.emplace(id, corpus_.authors_.size());
        corpus_.authors_.push_back(std::move(career));
    }
    return std::move(corpus_);
}

CorpusPaths CorpusPaths::in(const std::filesystem::path& dir) {
    return {dir / "works.tsv", dir / "authorships.tsv", dir / "references.tsv", dir / "authors.tsv"};
}

LoadedCorpus load_corpus(const CorpusPaths& paths) {
    for (const auto* p : {&paths.works, &paths.authorships, &paths.references, &paths.authors})
        if (!std::filesystem::is_regular_file(*p)) throw CorpusError("missing input file: " + p->string());

    Corpus::Builder builder;
    LoadReport& report = builder.report();

    {
        tsv::Reader r(paths.works);
        const auto c_id = r.require_column("work_id");
        const auto c_year = r.require_column("year");
        const auto c_field = r.column("field_id");
        const auto width = r.header().size();
        while (r.next()) {
            const auto& f = r.fields();
            if (f.size() != width || f[c_id].empty()) {
                ++report.malformed_rows;
                note(report, where(r) + ": wrong column count");
                continue;
            }
            auto year = tsv::parse_int(f[c_year]);
            if (!year || *year < kMinYear || *year > kMaxYear) {
                ++report.malformed_rows;
                note(report, where(r) + ": bad year '" + std::string(f[c_year]) + "'");
                continue;
            }
            std::optional<std::string> field;
            if (c_field && !f[*c_field].empty()) field = std::string(f[*c_field]);
            builder.add_work(f[c_id], static_cast<int>(*year), std::move(field));
        }
    }
    {
        tsv::Reader r(paths.references);
        const auto c_from = r.require_column("citing_work_id");
        const auto c_to = r.require_column("cited_work_id");
        const auto width = r.header().size();
        while (r.next()) {
            const auto& f = r.fields();
            if (f.size() != width || f[c_from].empty() || f[c_to].empty()) {
                ++report.malformed_rows;
                note(report, where(r) + ": wrong column count");
                continue;
            }
            const auto dangling_before = report.dangling_references;
            builder.add_reference(f[c_from], f[c_to]);
            if (report.dangling_references != dangling_before)
                note(report, where(r) + ": reference to unknown work retained as bare node");
        }
    }
    {
        tsv::Reader r(paths.authorships);
        const auto c_work = r.require_column("work_id");
        const auto c_author = r.require_column("author_id");
        const auto width = r.header().size();
        while (r.next()) {
            const auto& f = r.fields();
            if (f.size() != width || f[c_author].empty()) {
                ++report.malformed_rows;
                note(report, where(r) + ": wrong column count");
                continue;
            }
            if (!builder.add_authorship(f[c_work], f[c_author]))
                note(report, where(r) + ": authorship of unknown work '" + std::string(f[c_work]) + "'");
        }
    }
    {
        tsv::Reader r(paths.authors);
        const auto c_id = r.require_column("author_id");
        const auto c_name = r.column("name");
        const auto width = r.header().size();
        while (r.next()) {
            const auto& f = r.fields();
            if (f.size() != width || f[c_id].empty()) {
                ++report.malformed_rows;
                note(report, where(r) + ": wrong column count");
                continue;
            }
            builder.add_author(f[c_id], c_name ? f[*c_name] : std::string_view{});
        }
    }
    // build() leaves the report in place and adds duplicate-reference and unnamed-author counts.
    Corpus corpus = std::move(builder).build();
    return {std::move(corpus), std::move(report)};
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto paths = CorpusPaths::in(dir);
    {
        tsv::AtomicWriter w(paths.works);
        w.stream() << "work_id\tyear\tfield_id\n";
        for (const auto& work : corpus.works())
            if (!work.bare) w.stream() << work.id << '\t' << *work.year << '\t' << work.field.value_or("") << '\n';
        w.commit();
    }
    {
        tsv::AtomicWriter w(paths.references);
        w.stream() << "citing_work_id\tcited_work_id\n";
        for (const auto& work : corpus.works())
            for (WorkIndex r : work.references) w.stream() << work.id << '\t' << corpus.work(r).id << '\n';
        w.commit();
    }
    {
        tsv::AtomicWriter w(paths.authorships);
        w.stream() << "work_id\tauthor_id\n";
        for (const auto& a : corpus.authors())
            for (const auto& [year, ws] : a.works_by_year)
                for (WorkIndex x : ws) w.stream() << corpus.work(x).id << '\t' << a.id << '\n';
        w.commit();
    }
    {
        tsv::AtomicWriter w(paths.authors);
        w.stream() << "author_id\tname\n";
        for (const auto& a : corpus.authors()) w.stream() << a.id << '\t' << a.name << '\n';
        w.commit();
    }
}

std::vector<std::string> filter_eligible(const Corpus& corpus, const EligibilityCriteria& c) {
    if (c.min_span < 1) throw std::invalid_argument("min_span must be >= 1");
    if (c.start_lo > c.start_hi) throw std::invalid_argument("start_lo must not exceed start_hi");
    std::vector<std::string> out;
    for (const auto& a : corpus.authors()) {
        if (!a.has_works()) continue;
        if (a.first_year() < c.start_lo || a.first_year() > c.start_hi) continue;
        if (a.span_years() < c.min_span) continue;
        out.push_back(a.id);
    }
    return out;
}

CitingEvents citing_events(const Corpus& corpus, WorkIndex work, int window) {
    if (window < 1) throw std::invalid_argument("citation window must be >= 1");
    if (work >= corpus.works().size()) throw CorpusError("unknown work index");
    const auto& w = corpus.work(work);
    if (!w.year) throw CorpusError("work '" + w.id + "' has no known year");
    const int lo = *w.year;
    const int hi = *w.year + window - 1;
    CitingEvents out;
    for (WorkIndex c : corpus.citers(work)) {
        const auto& y = corpus.work(c).year;
        if (!y) {
            ++out.unknown_year;
            continue;
        }
        if (*y >= lo && *y <= hi) out.events.push_back({c, *y});
    }
    return out;
}

CitingEvents citing_events(const Corpus& corpus, std::string_view work_id, int window) {
    auto w = corpus.find_work(work_id);
    if (!w) throw CorpusError("unknown work '" + std::string(work_id) + "'");
    return citing_events(corpus, *w, window);
}

}  // namespace kcdyn
