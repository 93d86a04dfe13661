#include "kcdyn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "kcdyn/tsv.hpp"

namespace kcdyn {

namespace {

constexpr int kMinBlockSize = 1;
constexpr int kMaxBlockSize = 6;
constexpr double kNodeSavingSlack = 0.01;  // bits of extra rounding accepted for a smaller network
constexpr int kTopics = 32;
constexpr int kTopicSize = 16;
constexpr int kPoolYear = 1950;
constexpr int kLastCohortBucket = 10;  // "2010+"

double block_entropy(const std::vector<int>& sizes) {
    double total = 0.0;
    for (int s : sizes) total += s;
    double h = 0.0;
    for (int s : sizes) h -= (s / total) * std::log2(s / total);
    return sizes.size() > 1 ? h : 0.0;
}

struct TableEntry {
    double entropy;
    int nodes;
    std::vector<int> sizes;
};

void enumerate(std::vector<int>& cur, int min_size, std::vector<TableEntry>& out) {
    if (!cur.empty()) {
        int nodes = 0;
        for (int s : cur) nodes += s;
        out.push_back({block_entropy(cur), nodes, cur});
    }
    if (static_cast<int>(cur.size()) == kMaxBlocks) return;
    for (int s = min_size; s <= kMaxBlockSize; ++s) {
        cur.push_back(s);
        enumerate(cur, s, out);
        cur.pop_back();
    }
}

const std::vector<TableEntry>& block_table() {
    static const std::vector<TableEntry> table = [] {
        std::vector<TableEntry> t;
        std::vector<int> cur;
        enumerate(cur, kMinBlockSize, t);
        return t;
    }();
    return table;
}

std::string padded(long v, int width) {
    std::string s = std::to_string(v);
    return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

std::string topic_work(int topic, int k) { return "t" + padded(topic, 2) + "_" + padded(k, 2); }
std::string anchor_work(int k) { return "x" + padded(k, 3); }

double peak_level(const RegimeSpec& s) {
    return s.base_level + std::max(0.0, s.cohort_drift * kLastCohortBucket) + std::max(0.0, s.hot_amplitude);
}

/// k distinct values from [0, n), in draw order.
std::vector<int> sample_distinct(std::mt19937_64& rng, int n, int k) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
    }
    all.resize(static_cast<std::size_t>(k));
    return all;
}

}  // namespace

double max_component_entropy() { return std::log2(static_cast<double>(kMaxBlocks)); }

std::vector<int> blocks_for_entropy(double target) {
    double best_err = std::numeric_limits<double>::infinity();
    for (const auto& e : block_table()) best_err = std::min(best_err, std::abs(e.entropy - target));
    const TableEntry* best = nullptr;
    for (const auto& e : block_table())
        if (std::abs(e.entropy - target) <= best_err + kNodeSavingSlack && (!best || e.nodes < best->nodes)) best = &e;
    return best->sizes;
}

void validate(const RegimeSpec& s) {
    auto fail = [&](const std::string& what) { throw std::invalid_argument("regime '" + s.name + "': " + what); };
    for (double p : {s.interruption_prob, s.hot_prob, s.source_share})
        if (!(p >= 0.0 && p <= 1.0)) fail("probabilities and shares must lie in [0, 1]");
    if (s.interruption_min < 1 || s.interruption_max < s.interruption_min) fail("bad interruption length range");
    if (s.hot_length < 1) fail("hot streak length must be >= 1");
    if (s.career_min < 2 || s.career_max < s.career_min) fail("bad career length range");
    if (s.start_min > s.start_max || s.start_min < kMinYear) fail("bad start year range");
    if (s.start_max + s.career_max + s.diffusion_years > kMaxYear) fail("careers run past the last supported year");
    if (s.diffusion_years < 0 || s.diffusion_years > 9) fail("diffusion years must lie in [0, 9]");
    if (s.noise < 0.0 || s.base_level < 0.0) fail("level and noise must be non-negative");

    const double peak = peak_level(s);
    const double source = s.diffusion_years > 0 ? peak * s.source_share : peak;
    const double diffusion = s.diffusion_years > 0 ? peak * (1.0 - s.source_share) / s.diffusion_years : 0.0;
    const double cap = max_component_entropy();
    if (source > cap || diffusion > cap)
        fail("planted entropy exceeds log2(" + std::to_string(kMaxBlocks) + ") bits available per component");
}

SyntheticPopulation generate_population(const std::vector<RegimeSpec>& specs, int n_per_spec, std::uint64_t seed) {
    if (n_per_spec < 1) throw std::invalid_argument("n_per_spec must be >= 1");
    if (specs.empty()) throw std::invalid_argument("at least one regime is required");
    int max_diffusion = 1;
    for (const auto& s : specs) {
        validate(s);
        max_diffusion = std::max(max_diffusion, s.diffusion_years);
    }
    const int anchors = kMaxBlocks * max_diffusion;

    Corpus::Builder b;
    for (int t = 0; t < kTopics; ++t)
        for (int k = 0; k < kTopicSize; ++k) b.add_work(topic_work(t, k), kPoolYear);
    for (int k = 0; k < anchors; ++k) b.add_work(anchor_work(k), kPoolYear);

    SyntheticPopulation pop;
    long author_no = 0;
    for (std::size_t si = 0; si < specs.size(); ++si) {
        const auto& spec = specs[si];
        for (int i = 0; i < n_per_spec; ++i, ++author_no) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(si), static_cast<std::uint32_t>(i)};
            std::mt19937_64 rng(seq);

            PlantedAuthor truth;
            truth.author_id = "a" + padded(author_no, 6);
            truth.regime = spec.name;
            truth.gender = spec.gender;
            const std::string& id = truth.author_id;
            b.add_author(id, "Synthetic Author " + std::to_string(author_no));
            pop.genders[id] = spec.gender;

            const int length = std::uniform_int_distribution<int>(spec.career_min, spec.career_max)(rng);
            const int start = std::uniform_int_distribution<int>(spec.start_min, spec.start_max)(rng);
            const int bucket = std::clamp((start - 1960) / 5, 0, kLastCohortBucket);
            const auto n = static_cast<std::size_t>(length);

            // First and last years stay active so the career span is as drawn.
            std::vector<bool> active(n, true);
            std::bernoulli_distribution interrupt(spec.interruption_prob);
            for (int k = 1, gap_left = 0; k < length - 1; ++k) {
                if (gap_left > 0) {
                    active[static_cast<std::size_t>(k)] = false;
                    --gap_left;
                } else if (interrupt(rng)) {
                    const int dur =
                        std::uniform_int_distribution<int>(spec.interruption_min, spec.interruption_max)(rng);
                    active[static_cast<std::size_t>(k)] = false;
                    gap_left = std::min(dur, length - 1 - k) - 1;
                }
            }
            std::vector<bool> hot(n, false);
            std::bernoulli_distribution streak(spec.hot_prob);
            for (int k = 0, hot_left = 0; k < length; ++k) {
                if (hot_left > 0) {
                    hot[static_cast<std::size_t>(k)] = true;
                    --hot_left;
                } else if (streak(rng)) {
                    hot[static_cast<std::size_t>(k)] = true;
                    hot_left = spec.hot_length - 1;
                }
            }

            std::normal_distribution<double> z(0.0, 1.0);
            for (int k = 0; k < length; ++k) {
                const auto kk = static_cast<std::size_t>(k);
                PlantedYear py;
                py.year = start + k;
                py.active = active[kk];
                const double level = spec.base_level + spec.cohort_drift * bucket + spec.noise * z(rng) +
                                     (hot[kk] ? spec.hot_amplitude : 0.0);
                if (!py.active) {
                    truth.years.push_back(py);
                    continue;
                }
                py.target = std::max(0.0, level);
                const double cap = max_component_entropy();
                const int dy = spec.diffusion_years;
                const double source_target = std::min(cap, dy > 0 ? py.target * spec.source_share : py.target);
                const double diffusion_target = dy > 0 ? std::min(cap, py.target * (1.0 - spec.source_share) / dy) : 0.0;

                // One paper per source block; each block cites works of its own topic.
                const auto source_blocks = blocks_for_entropy(source_target);
                py.source = block_entropy(source_blocks);
                const auto topics = sample_distinct(rng, kTopics, static_cast<int>(source_blocks.size()));
                std::vector<std::string> papers;
                for (std::size_t j = 0; j < source_blocks.size(); ++j) {
                    const std::string paper = id + "_p" + std::to_string(py.year) + "_" + std::to_string(j);
                    b.add_work(paper, py.year, spec.field);
                    b.add_authorship(paper, id);
                    for (int w : sample_distinct(rng, kTopicSize, source_blocks[j]))
                        b.add_reference(paper, topic_work(topics[j], w));
                    papers.push_back(paper);
                }

                // Citer blocks: citers of one block share an anchor, anchors distinct within the author-year.
                const auto anchor_ids = sample_distinct(rng, anchors, kMaxBlocks * std::max(dy, 1));
                std::size_t next_anchor = 0, next_paper = 0;
                for (int o = 1; o <= dy; ++o) {
                    const auto citer_blocks = blocks_for_entropy(diffusion_target);
                    py.diffusion += block_entropy(citer_blocks);
                    for (std::size_t j = 0; j < citer_blocks.size(); ++j) {
                        const std::string anchor = anchor_work(anchor_ids[next_anchor++]);
                        for (int m = 0; m < citer_blocks[j]; ++m) {
                            const std::string citer = id + "_c" + std::to_string(py.year) + "_" + std::to_string(o) +
                                                      "_" + std::to_string(j) + "_" + std::to_string(m);
                            b.add_work(citer, py.year + o);
                            b.add_reference(citer, papers[next_paper++ % papers.size()]);
                            b.add_reference(citer, anchor);
                        }
                    }
                }
                truth.years.push_back(py);
            }
            pop.truth.push_back(std::move(truth));
        }
    }
    pop.corpus = std::move(b).build();
    return pop;
}

std::vector<std::string> preset_names() { return {"contrast", "flat"}; }

std::vector<RegimeSpec> preset_regimes(std::string_view name) {
    RegimeSpec a;
    a.gender = Gender::Female;
    RegimeSpec b;
    b.gender = Gender::Male;
    if (name == "contrast") {
        a.name = "interrupted";
        a.interruption_prob = 0.25;
        b.name = "steady";
        b.interruption_prob = 0.03;
    } else if (name == "flat") {
        a.name = "flat_f";
        b.name = "flat_m";
    } else {
        throw std::invalid_argument("unknown synth preset '" + std::string(name) + "'");
    }
    return {a, b};
}

void write_population(const SyntheticPopulation& pop, const std::filesystem::path& dir) {
    write_corpus(pop.corpus, dir);
    {
        tsv::AtomicWriter w(dir / "genders.tsv");
        w.stream() << "author_id\tgender\n";
        for (const auto& [id, g] : pop.genders) w.stream() << id << '\t' << to_string(g) << '\n';
        w.commit();
    }
    tsv::AtomicWriter w(dir / "ground_truth.tsv");
    w.stream() << "author_id\tregime\tgender\tyear\tactive\ttarget\tsource\tdiffusion\tkcc\n";
    for (const auto& a : pop.truth)
        for (const auto& y : a.years)
            w.stream() << a.author_id << '\t' << a.regime << '\t' << to_string(a.gender) << '\t' << y.year << '\t'
                       << (y.active ? 1 : 0) << '\t' << tsv::format_double(y.target) << '\t'
                       << tsv::format_double(y.source) << '\t' << tsv::format_double(y.diffusion) << '\t'
                       << tsv::format_double(y.kcc()) << '\n';
    w.commit();
}

std::vector<PlantedAuthor> read_ground_truth(const std::filesystem::path& path) {
    tsv::Reader r(path);
    const auto c_author = r.require_column("author_id");
    const auto c_regime = r.require_column("regime");
    const auto c_gender = r.require_column("gender");
    const auto c_year = r.require_column("year");
    const auto c_active = r.require_column("active");
    const auto c_target = r.require_column("target");
    const auto c_source = r.require_column("source");
    const auto c_diffusion = r.require_column("diffusion");
    std::vector<PlantedAuthor> out;
    while (r.next()) {
        const auto& f = r.fields();
        auto bad = [&](const char* what) {
            return std::runtime_error(path.string() + ":" + std::to_string(r.line_number()) + ": " + what);
        };
        if (f.size() != r.header().size()) throw bad("wrong column count");
        const auto year = tsv::parse_int(f[c_year]);
        const auto target = tsv::parse_double(f[c_target]);
        const auto source = tsv::parse_double(f[c_source]);
        const auto diffusion = tsv::parse_double(f[c_diffusion]);
        const auto gender = parse_gender(f[c_gender]);
        if (!year || !target || !source || !diffusion || !gender) throw bad("unparsable ground truth row");
        if (out.empty() || out.back().author_id != f[c_author]) {
            out.emplace_back();
            out.back().author_id = std::string(f[c_author]);
            out.back().regime = std::string(f[c_regime]);
            out.back().gender = *gender;
        }
        PlantedYear y;
        y.year = static_cast<int>(*year);
        y.active = f[c_active] == "1";
        y.target = *target;
        y.source = *source;
        y.diffusion = *diffusion;
        out.back().years.push_back(y);
    }
    return out;
}

}  // namespace kcdyn
