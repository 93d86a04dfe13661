#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kcdyn {

/// Guard on |mean| below which stability is reported invalid.
inline constexpr double kStabilityMeanEpsilon = 1e-9;

/// 1 - sigma/mu with the population standard deviation. nullopt when
/// |mu| <= epsilon. Throws std::invalid_argument for fewer than two values.
std::optional<double> stability(std::span<const double> series, double epsilon = kStabilityMeanEpsilon);

/// Root mean square of successive differences. Throws for fewer than two values.
double volatility(std::span<const double> series);

/// Linear interpolation between order statistics at zero-based rank (n-1)*tau/100.
double percentile_threshold(std::span<const double> values, double tau);

/// Years strictly above the series' own tau-th percentile.
std::vector<bool> highlight_mask(std::span<const double> series, double tau);

/// Whether a qualifying period's length counts highlight years only or the
/// whole calendar stretch including bridged gap years.
enum class PeriodLength { HighlightYears, CalendarSpan };

struct PersistenceParams {
    int tau = 70;           ///< percentile threshold
    int min_duration = 2;   ///< highlight years a period needs to qualify
    int gap_tolerance = 0;  ///< non-highlight years allowed between consecutive highlight years

    /// "P{tau}_C{d}_G{g}"
    std::string label() const;
    static std::optional<PersistenceParams> parse(std::string_view label);
    friend bool operator==(const PersistenceParams&, const PersistenceParams&) = default;
};

/// tau in {70, 75, 80} x (d, g) in {(2,0),(2,1),(3,0),(3,1),(3,2),(4,0),(4,1),(4,2)}: 24 measures.
std::vector<PersistenceParams> default_persistence_grid();

/// Merges highlight years separated by at most `gap_tolerance` non-highlight
/// years, keeps merged periods holding at least `min_duration` highlight years,
/// and returns their total length divided by the mask length.
double persistence_from_mask(const std::vector<bool>& mask, int min_duration, int gap_tolerance,
                             PeriodLength length = PeriodLength::HighlightYears);

double persistence(std::span<const double> series, const PersistenceParams& params,
                   PeriodLength length = PeriodLength::HighlightYears);

struct IndicatorSet {
    std::optional<double> kcs;  ///< nullopt: near-zero mean, excluded from KCS aggregates
    double kcv = 0.0;
    std::vector<PersistenceParams> grid;
    std::vector<double> kcp;  ///< parallel to grid

    /// KCP for `label`; throws std::out_of_range when the grid lacks it.
    double kcp_for(std::string_view label) const;
};

IndicatorSet indicator_set(std::span<const double> series, const std::vector<PersistenceParams>& grid,
                           PeriodLength length = PeriodLength::HighlightYears);

struct AuthorIndicators {
    std::string author_id;
    IndicatorSet indicators;
};

/// indicators.tsv: author_id, kcs, kcs_valid, kcv, then one column per KCP label.
/// Invalid KCS is written as an empty field with kcs_valid = 0.
void write_indicators_tsv(const std::filesystem::path& path, std::span<const AuthorIndicators> rows,
                          const std::vector<PersistenceParams>& grid);
std::vector<AuthorIndicators> read_indicators_tsv(const std::filesystem::path& path);

}  // namespace kcdyn
