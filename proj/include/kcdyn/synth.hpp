#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kcdyn/cohort.hpp"

namespace kcdyn {

/// Planted career regime for one synthetic group.
struct RegimeSpec {
    std::string name = "regime";
    Gender gender = Gender::Unknown;  ///< label written to genders.tsv
    std::string field = "1";

    double base_level = 3.0;  ///< target KCC (bits) of an active year
    double noise = 0.25;      ///< sd of per-year Gaussian noise on the level
    double cohort_drift = 0.0;  ///< added per 5-year cohort bucket after 1960

    double interruption_prob = 0.05;  ///< per year, chance a publication gap starts
    int interruption_min = 1;
    int interruption_max = 2;

    double hot_prob = 0.05;  ///< per year, chance a hot streak starts
    int hot_length = 3;
    double hot_amplitude = 1.0;

    double source_share = 0.4;  ///< fraction of the level carried by source entropy
    int diffusion_years = 2;    ///< citing years (t+1 ...) that receive citations

    int career_min = 10;
    int career_max = 16;
    int start_min = 1960;
    int start_max = 2010;
};

/// Largest entropy a single planted component can carry: log2 of kMaxBlocks.
inline constexpr int kMaxBlocks = 8;
double max_component_entropy();

/// Block sizes (each 1..6, at most kMaxBlocks blocks) whose size distribution
/// has entropy within 0.01 bits of the closest achievable one, using as few
/// nodes as possible. Achievable entropies are sparse below about 0.6 bits.
std::vector<int> blocks_for_entropy(double target);

/// Throws std::invalid_argument for out-of-range probabilities, bad lengths, or
/// levels whose components cannot be planted.
void validate(const RegimeSpec& spec);

struct PlantedYear {
    int year = 0;
    bool active = false;
    double target = 0.0;     ///< intended KCC before block rounding
    double source = 0.0;     ///< realized source entropy
    double diffusion = 0.0;  ///< realized diffusion entropy, summed over citing years
    double kcc() const { return source + diffusion; }
};

struct PlantedAuthor {
    std::string author_id;
    std::string regime;
    Gender gender = Gender::Unknown;
    std::vector<PlantedYear> years;
};

struct SyntheticPopulation {
    Corpus corpus;
    std::map<std::string, Gender, std::less<>> genders;
    std::vector<PlantedAuthor> truth;  ///< ordered by author id
};

/// Builds `n_per_spec` authors per spec. Deterministic in `seed`.
SyntheticPopulation generate_population(const std::vector<RegimeSpec>& specs, int n_per_spec, std::uint64_t seed);

/// Named two-group setups: "contrast" (female group with frequent publication
/// gaps, steady male group) and "flat" (identical regimes, opposite labels).
std::vector<RegimeSpec> preset_regimes(std::string_view name);
std::vector<std::string> preset_names();

/// Writes works/authorships/references/authors.tsv, genders.tsv and ground_truth.tsv.
void write_population(const SyntheticPopulation& pop, const std::filesystem::path& dir);

/// ground_truth.tsv: author_id, regime, gender, year, active, target, source, diffusion, kcc.
std::vector<PlantedAuthor> read_ground_truth(const std::filesystem::path& path);

}  // namespace kcdyn
