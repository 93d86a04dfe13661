#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kcdyn {

/// Dense index of a work inside one Corpus. Not stable across loads.
using WorkIndex = std::uint32_t;

inline constexpr int kMinYear = 1900;
inline constexpr int kMaxYear = 2100;

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Work {
    std::string id;
    std::optional<int> year;            ///< nullopt for bare (dangling) works
    std::optional<std::string> field;
    std::vector<WorkIndex> references;  ///< sorted, unique, never contains the work itself
    bool bare = false;                  ///< known only through references.tsv
};

struct AuthorCareer {
    std::string id;
    std::string name;
    std::map<int, std::vector<WorkIndex>> works_by_year;

    bool has_works() const { return !works_by_year.empty(); }
    int first_year() const { return works_by_year.begin()->first; }
    int last_year() const { return works_by_year.rbegin()->first; }
    /// Inclusive calendar years, 0 for an author without works.
    int span_years() const { return has_works() ? last_year() - first_year() + 1 : 0; }
    std::span<const WorkIndex> works_in(int year) const;
};

/// Counters for rows that were skipped or patched up during ingest.
struct LoadReport {
    std::size_t malformed_rows = 0;        ///< wrong column count, unparsable or out-of-range year
    std::size_t dangling_references = 0;  ///< reference rows naming a work absent from works.tsv
    std::size_t self_references = 0;      ///< dropped
    std::size_t duplicate_references = 0;
    std::size_t orphan_authorships = 0;   ///< authorship rows naming an unknown work (skipped)
    std::size_t unnamed_authors = 0;      ///< authors present only in authorships.tsv

    std::size_t warning_count() const {
        return malformed_rows + dangling_references + self_references + duplicate_references +
               orphan_authorships + unnamed_authors;
    }
    std::vector<std::string> messages;  ///< first few diagnostics, for the manifest
};

/// Immutable, fully cross-linked citation corpus. Safe for concurrent reads.
class Corpus {
public:
    class Builder;

    const std::vector<Work>& works() const { return works_; }
    const Work& work(WorkIndex w) const { return works_.at(w); }
    std::optional<WorkIndex> find_work(std::string_view id) const;

    /// Authors ordered by id.
    const std::vector<AuthorCareer>& authors() const { return authors_; }
    const AuthorCareer* find_author(std::string_view id) const;
    const AuthorCareer& author(std::string_view id) const;

    /// Works citing `w`, ascending by index. Transpose of Work::references.
    std::span<const WorkIndex> citers(WorkIndex w) const { return forward_.at(w); }

    std::size_t reference_count() const { return reference_count_; }
    std::size_t forward_count() const;

private:
    std::vector<Work> works_;
    std::unordered_map<std::string, WorkIndex> work_ids_;
    std::vector<AuthorCareer> authors_;
    std::unordered_map<std::string, std::size_t> author_ids_;
    std::vector<std::vector<WorkIndex>> forward_;
    std::size_t reference_count_ = 0;
};

/// Incremental construction; load_corpus() and tests both go through here.
class Corpus::Builder {
public:
    /// Throws CorpusError on a duplicate id. A bare node with the same id is upgraded in place.
    WorkIndex add_work(std::string_view id, int year, std::optional<std::string> field = std::nullopt);
    /// Creates bare nodes for unknown ids. Returns false if the row was dropped as a self-reference.
    bool add_reference(std::string_view citing, std::string_view cited);
    /// Returns false (and records nothing) when the work is unknown or bare.
    bool add_authorship(std::string_view work_id, std::string_view author_id);
    void add_author(std::string_view author_id, std::string_view name);

    LoadReport& report() { return report_; }
    Corpus build() &&;

private:
    WorkIndex intern(std::string_view id, bool& created);

    Corpus corpus_;
    std::vector<std::vector<WorkIndex>> refs_;
    std::map<std::string, std::string, std::less<>> names_;
    std::map<std::string, std::vector<WorkIndex>, std::less<>> authored_;
    LoadReport report_;
};

struct CorpusPaths {
    std::filesystem::path works;
    std::filesystem::path authorships;
    std::filesystem::path references;
    std::filesystem::path authors;

    /// Conventional file names inside one directory.
    static CorpusPaths in(const std::filesystem::path& dir);
};

struct LoadedCorpus {
    Corpus corpus;
    LoadReport report;
};

/// Reads the four TSV files. Missing files and duplicate work ids throw CorpusError.
LoadedCorpus load_corpus(const CorpusPaths& paths);

/// Writes the corpus back out in the same four-file layout.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

struct EligibilityCriteria {
    int min_span = 10;
    int start_lo = 1960;
    int start_hi = 2010;
};

/// Author ids (sorted) whose first year lies in [start_lo, start_hi] and whose
/// inclusive span is at least min_span.
std::vector<std::string> filter_eligible(const Corpus& corpus, const EligibilityCriteria& criteria);

struct Citation {
    WorkIndex citer;
    int year;
};

struct CitingEvents {
    std::vector<Citation> events;
    std::size_t unknown_year = 0;  ///< citers skipped because their year is unknown
};

/// Citations of `work` whose year lies in [t, t + window - 1], t = year of `work`.
CitingEvents citing_events(const Corpus& corpus, WorkIndex work, int window);
CitingEvents citing_events(const Corpus& corpus, std::string_view work_id, int window);

}  // namespace kcdyn
