#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kcdyn/corpus.hpp"
#include "kcdyn/dynamics.hpp"

namespace kcdyn {

enum class Gender { Male, Female, Unknown };

std::string_view to_string(Gender g);
/// Accepts "male"/"female"/"unknown" and the single letters m/f/u, any case.
std::optional<Gender> parse_gender(std::string_view s);

inline constexpr double kDefaultGenderThreshold = 0.85;

struct GenderLabel {
    Gender value = Gender::Unknown;
    double confidence = 0.0;
};

/// Lowercased given name -> most likely gender and its probability.
class NameTable {
public:
    /// TSV with header name, label, probability.
    static NameTable load(const std::filesystem::path& path);

    void add(std::string_view name, Gender label, double probability);
    std::optional<GenderLabel> find(std::string_view given_name) const;
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, GenderLabel, std::less<>> entries_;
};

/// Given name of a display name: the first token, or the first token after a
/// comma for "Family, Given" forms. Lowercased.
std::string given_name(std::string_view full_name);

/// Known label when its probability reaches `threshold`, otherwise Unknown.
GenderLabel infer_gender(std::string_view full_name, const NameTable& table,
                         double threshold = kDefaultGenderThreshold);

/// genders.tsv: author_id, gender. Explicit labels, confidence 1.
std::map<std::string, Gender, std::less<>> load_gender_overrides(const std::filesystem::path& path);

/// Label per author id: overrides first, then name inference.
std::map<std::string, GenderLabel, std::less<>> label_authors(const Corpus& corpus, const NameTable& table,
                                                              const std::map<std::string, Gender, std::less<>>& overrides,
                                                              double threshold = kDefaultGenderThreshold);

/// "1960-1964" ... "2005-2009", "2010+". Throws std::invalid_argument before 1960.
std::string assign_cohort(int first_year);
/// All cohort labels in chronological order.
std::vector<std::string> cohort_labels();

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;  ///< two-sided
    double mean_a = 0.0;
    double mean_b = 0.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
};

/// Unequal-variance two-sample t-test with Welch-Satterthwaite df. Throws
/// std::invalid_argument when a sample has fewer than two values or zero variance.
TTestResult welch_ttest(std::span<const double> a, std::span<const double> b);

/// Modal field over the author's works, ties to the smaller id (numeric when
/// both ids are integers). "unknown" when no work carries a field.
std::string primary_field(const Corpus& corpus, const AuthorCareer& career);

/// Everything the reports need about one author.
struct AuthorRecord {
    std::string author_id;
    Gender gender = Gender::Unknown;
    std::string cohort;
    std::string field;
    IndicatorSet indicators;
};

enum class Indicator { Kcs, Kcv, Kcp };

/// Indicator value for the record; nullopt for invalid KCS.
std::optional<double> indicator_value(const AuthorRecord& r, Indicator which, std::string_view kcp_label);

struct GroupStat {
    std::size_t n = 0;
    std::optional<double> mean;  ///< absent for an empty group
};

struct IndicatorGap {
    GroupStat female;
    GroupStat male;
    std::optional<double> gap_abs;  ///< male - female
    std::optional<double> gap_pct;  ///< 100 * gap_abs / female mean; absent when that mean is ~0
};

/// Gap between two samples. Either side may be empty.
IndicatorGap compute_gap(std::span<const double> female, std::span<const double> male);

struct GapRow {
    std::string cohort;
    std::size_t n_female = 0;
    std::size_t n_male = 0;
    IndicatorGap kcs, kcv, kcp;
};

inline constexpr std::string_view kDefaultKcpLabel = "P70_C2_G0";

/// One row per cohort that has at least one male or female author, in
/// chronological order. Unknown-gender records are ignored.
std::vector<GapRow> gap_table(std::span<const AuthorRecord> records, std::string_view kcp_label = kDefaultKcpLabel);

/// The seven gap columns first, then means and group sizes.
void write_gap_table_tsv(const std::filesystem::path& path, std::span<const GapRow> rows);
/// cohort, kcs_gap_pct, kcv_gap_pct, kcp_gap_pct.
void write_trend_tsv(const std::filesystem::path& path, std::span<const GapRow> rows);

struct FieldSummaryRow {
    std::string field;
    Gender gender = Gender::Unknown;
    std::size_t n = 0;
    std::size_t n_kcs = 0;
    std::optional<double> kcs_mean;
    double kcv_mean = 0.0;
    double kcp_mean = 0.0;
};

/// Per field and gender (female, then male), fields in id order with "unknown" last.
std::vector<FieldSummaryRow> field_summary(std::span<const AuthorRecord> records,
                                           std::string_view kcp_label = kDefaultKcpLabel);
void write_field_summary_tsv(const std::filesystem::path& path, std::span<const FieldSummaryRow> rows);

/// Whole-population female/male comparison for one indicator.
struct Comparison {
    std::string indicator;  ///< "KCS", "KCV" or a KCP label
    IndicatorGap gap;
    std::optional<TTestResult> test;  ///< female as sample a; absent when degenerate
};

/// KCS, KCV, then every KCP label of the records' grid.
std::vector<Comparison> compare_genders(std::span<const AuthorRecord> records);
void write_comparison_tsv(const std::filesystem::path& path, std::span<const Comparison> rows);

}  // namespace kcdyn
