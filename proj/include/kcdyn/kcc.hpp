#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kcdyn/conet.hpp"
#include "kcdyn/corpus.hpp"
#include "kcdyn/mapeq.hpp"

namespace kcdyn {

/// Tolerance on proportions summing to one.
inline constexpr double kProportionTolerance = 1e-9;

/// Shannon entropy in bits, -sum p log2 p. Empty and singleton inputs give 0.
/// Throws std::invalid_argument if a value lies outside (0, 1] or the values
/// do not sum to 1 within kProportionTolerance.
double entropy(std::span<const double> proportions);

/// Normalizes non-negative masses, dropping zeros. All-zero input gives {}.
std::vector<double> normalize_masses(std::span<const double> masses);

/// Per-module share of `node_mass` under `partition`, in module order, zeros dropped.
std::vector<double> module_proportions(const Partition& partition, std::span<const double> node_mass);

enum class ReferenceWeighting {
    Occurrences,  ///< a work listed by two of the year's papers counts twice
    Distinct,     ///< each referenced work counts once
};

enum class InactivePolicy {
    Zero,  ///< publication-free years inside the span carry the fill value
    Skip,  ///< indicators use active years only
};

struct KccConfig {
    int window = 10;  ///< citing years [t, t + window - 1]
    ReferenceWeighting weighting = ReferenceWeighting::Occurrences;
    NetworkOptions network;
    InactivePolicy inactive = InactivePolicy::Zero;
    double inactive_fill = 0.0;
};

/// Entropy of the reference-mass distribution over clusters of the author's
/// year-`year` co-citation network. 0 when there are no references.
double source_entropy(const Corpus& corpus, std::string_view author_id, int year, const ClusterFn& cluster,
                      ReferenceWeighting weighting = ReferenceWeighting::Occurrences,
                      const NetworkOptions& network = {});

/// Entropy of year-`citing_year` citers over clusters of the forward network of
/// the author's `pub_year` publications. Throws std::invalid_argument when
/// `citing_year` falls outside the window.
double diffusion_entropy(const Corpus& corpus, std::string_view author_id, int pub_year, int citing_year, int window,
                         const ClusterFn& cluster, const NetworkOptions& network = {});

/// Diffusion entropy for every citing year of the window (index 0 = pub_year),
/// clustering the forward network once.
std::vector<double> diffusion_profile(const Corpus& corpus, std::string_view author_id, int pub_year, int window,
                                      const ClusterFn& cluster, const NetworkOptions& network = {});

struct KccYear {
    double source = 0.0;
    std::vector<double> diffusion;  ///< per citing year in the window
    double value = 0.0;             ///< source + sum(diffusion), or the fill value when inactive
    bool active = false;
};

KccYear kcc_year(const Corpus& corpus, std::string_view author_id, int year, const KccConfig& config,
                 const ClusterFn& cluster);

struct KccSeries {
    std::string author_id;
    int start_year = 0;
    std::vector<double> values;  ///< one per calendar year from start_year
    std::vector<bool> active;
    std::vector<double> source;     ///< source entropy per year (0 when inactive)
    std::vector<double> diffusion;  ///< summed diffusion entropy per year

    std::size_t size() const { return values.size(); }
    int end_year() const { return start_year + static_cast<int>(values.size()) - 1; }

    /// The values the indicators should see: all years, or active ones only.
    std::vector<double> effective(InactivePolicy policy) const;
};

/// KCC for every calendar year of the author's career. Throws
/// std::invalid_argument when the career spans fewer than two years.
KccSeries kcc_series(const Corpus& corpus, std::string_view author_id, const KccConfig& config,
                     const ClusterFn& cluster);

/// TSV with header author_id, year, kcc, active, source, diffusion. The two
/// component columns are optional on read.
void write_series_tsv(const std::filesystem::path& path, std::span<const KccSeries> series);
std::vector<KccSeries> read_series_tsv(const std::filesystem::path& path);

}  // namespace kcdyn
