#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kcdyn/cohort.hpp"
#include "kcdyn/corpus.hpp"
#include "kcdyn/dynamics.hpp"
#include "kcdyn/kcc.hpp"

namespace kcdyn {

struct RunConfig {
    std::filesystem::path input_dir;  ///< default location of the corpus files and genders.tsv
    std::filesystem::path works, authorships, references, authors;  ///< override input_dir/<name>.tsv
    std::filesystem::path genders;  ///< explicit labels; default input_dir/genders.tsv when present
    std::filesystem::path names;    ///< name-frequency table; optional
    std::filesystem::path output_dir = "out";

    EligibilityCriteria eligibility;
    double gender_threshold = kDefaultGenderThreshold;

    int window = 10;
    ReferenceWeighting weighting = ReferenceWeighting::Occurrences;
    bool weighted_network = true;
    std::uint64_t seed = 0;
    int trials = 10;

    InactivePolicy inactive = InactivePolicy::Zero;
    std::vector<PersistenceParams> grid = default_persistence_grid();
    PeriodLength period_length = PeriodLength::HighlightYears;

    std::string kcp_label = std::string(kDefaultKcpLabel);
    int workers = 1;

    /// Progress lines; nullptr for silence.
    std::function<void(std::string_view)> log;

    CorpusPaths corpus_paths() const;
    std::filesystem::path genders_path() const;  ///< empty when none applies
    /// Throws std::invalid_argument describing the first bad value.
    void validate() const;
};

enum class Stage { Ingest, Kcc, Dynamics, Report };
std::string_view stage_name(Stage s);
std::vector<Stage> all_stages();

/// Stage files inside the output directory.
namespace outputs {
inline constexpr std::string_view kRoster = "roster.tsv";
inline constexpr std::string_view kSeries = "series.tsv";
inline constexpr std::string_view kIndicators = "indicators.tsv";
inline constexpr std::string_view kGapTable = "gap_table.tsv";
inline constexpr std::string_view kTrend = "trend.tsv";
inline constexpr std::string_view kFieldSummary = "field_summary.tsv";
inline constexpr std::string_view kComparison = "comparison.tsv";
inline constexpr std::string_view kManifest = "manifest.json";
}  // namespace outputs

/// A stage's upstream results no longer match the current inputs or config.
class StaleCacheError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Any failure inside a stage; what() names the stage. Outputs the stage had
/// written are removed before this is thrown.
class StageError : public std::runtime_error {
public:
    StageError(Stage stage, const std::string& message);
    Stage stage() const { return stage_; }

private:
    Stage stage_;
};

/// Runs one stage, always recomputing it. Upstream stage outputs must exist and
/// match both the manifest and the current config, else StaleCacheError.
void run_stage(Stage stage, const RunConfig& config);

/// Runs every stage in order, reusing a stage whose recorded fingerprint
/// (input checksums plus the config values it depends on) is unchanged.
void run_pipeline(const RunConfig& config);

/// roster.tsv row: one eligible author.
struct RosterEntry {
    std::string author_id;
    int first_year = 0;
    int last_year = 0;
    std::string cohort;
    std::string field;
    GenderLabel gender;
};

void write_roster_tsv(const std::filesystem::path& path, std::span<const RosterEntry> rows);
std::vector<RosterEntry> read_roster_tsv(const std::filesystem::path& path);

}  // namespace kcdyn
