#include "kcdyn/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include <json.hpp>

#include "kcdyn/checksum.hpp"
#include "kcdyn/parallel.hpp"
#include "kcdyn/tsv.hpp"

namespace kcdyn {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kPreCohort = "pre-1960";

std::string_view to_string(InactivePolicy p) { return p == InactivePolicy::Zero ? "zero" : "skip"; }
std::string_view to_string(ReferenceWeighting w) {
    return w == ReferenceWeighting::Occurrences ? "occurrences" : "distinct";
}
std::string_view to_string(PeriodLength l) { return l == PeriodLength::HighlightYears ? "highlight" : "calendar"; }

Json grid_labels(const std::vector<PersistenceParams>& grid) {
    Json out = Json::array();
    for (const auto& p : grid) out.push_back(p.label());
    return out;
}

Json config_snapshot(const RunConfig& c) {
    const auto paths = c.corpus_paths();
    return Json{
        {"works", paths.works.string()},
        {"authorships", paths.authorships.string()},
        {"references", paths.references.string()},
        {"authors", paths.authors.string()},
        {"genders", c.genders_path().string()},
        {"names", c.names.string()},
        {"output_dir", c.output_dir.string()},
        {"min_span", c.eligibility.min_span},
        {"start_lo", c.eligibility.start_lo},
        {"start_hi", c.eligibility.start_hi},
        {"gender_threshold", c.gender_threshold},
        {"window", c.window},
        {"weighting", to_string(c.weighting)},
        {"network", c.weighted_network ? "weighted" : "unweighted"},
        {"seed", c.seed},
        {"trials", c.trials},
        {"inactive", to_string(c.inactive)},
        {"grid", grid_labels(c.grid)},
        {"kcp_period_length", to_string(c.period_length)},
        {"kcp_label", c.kcp_label},
        {"workers", c.workers},
    };
}

/// Checksums memoized for the duration of one command.
class Checksums {
public:
    std::string of(const fs::path& p) {
        if (p.empty()) return "";
        const auto key = p.lexically_normal().string();
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        return cache_[key] = fs::exists(p) ? sha256_file(p) : "missing";
    }
    void forget(const fs::path& p) { cache_.erase(p.lexically_normal().string()); }

private:
    std::map<std::string, std::string> cache_;
};

std::vector<std::string> stage_outputs(Stage s) {
    switch (s) {
        case Stage::Ingest: return {std::string(outputs::kRoster)};
        case Stage::Kcc: return {std::string(outputs::kSeries)};
        case Stage::Dynamics: return {std::string(outputs::kIndicators)};
        case Stage::Report:
            return {std::string(outputs::kGapTable), std::string(outputs::kTrend), std::string(outputs::kFieldSummary),
                    std::string(outputs::kComparison)};
    }
    return {};
}

struct Context {
    const RunConfig& cfg;
    fs::path out;
    Json manifest;
    Checksums sums;
    std::optional<LoadedCorpus> corpus;

    void log(const std::string& msg) const {
        if (cfg.log) cfg.log(msg);
    }
    fs::path file(std::string_view name) const { return out / std::string(name); }

    const LoadedCorpus& loaded() {
        if (!corpus) corpus = load_corpus(cfg.corpus_paths());
        return *corpus;
    }

    Json fingerprint(Stage s) {
        const auto paths = cfg.corpus_paths();
        Json inputs, params;
        switch (s) {
            case Stage::Ingest:
                inputs = {{"works", sums.of(paths.works)},
                          {"authorships", sums.of(paths.authorships)},
                          {"references", sums.of(paths.references)},
                          {"authors", sums.of(paths.authors)},
                          {"genders", sums.of(cfg.genders_path())},
                          {"names", sums.of(cfg.names)}};
                params = {{"min_span", cfg.eligibility.min_span},
                          {"start_lo", cfg.eligibility.start_lo},
                          {"start_hi", cfg.eligibility.start_hi},
                          {"gender_threshold", cfg.gender_threshold}};
                break;
            case Stage::Kcc:
                inputs = {{"works", sums.of(paths.works)},
                          {"authorships", sums.of(paths.authorships)},
                          {"references", sums.of(paths.references)},
                          {"roster", sums.of(file(outputs::kRoster))}};
                params = {{"window", cfg.window},
                          {"weighting", to_string(cfg.weighting)},
                          {"network", cfg.weighted_network ? "weighted" : "unweighted"},
                          {"seed", cfg.seed},
                          {"trials", cfg.trials}};
                break;
            case Stage::Dynamics:
                inputs = {{"series", sums.of(file(outputs::kSeries))}};
                params = {{"inactive", to_string(cfg.inactive)},
                          {"grid", grid_labels(cfg.grid)},
                          {"kcp_period_length", to_string(cfg.period_length)}};
                break;
            case Stage::Report:
                inputs = {{"roster", sums.of(file(outputs::kRoster))},
                          {"indicators", sums.of(file(outputs::kIndicators))}};
                params = {{"kcp_label", cfg.kcp_label}};
                break;
        }
        return Json{{"inputs", inputs}, {"params", params}};
    }

    /// Names of fingerprint entries that differ, e.g. "inputs.works".
    static std::vector<std::string> differences(const Json& recorded, const Json& current) {
        std::vector<std::string> out;
        for (const char* part : {"inputs", "params"}) {
            std::set<std::string> keys;
            if (recorded.contains(part))
                for (const auto& [k, v] : recorded[part].items()) keys.insert(k);
            for (const auto& [k, v] : current[part].items()) keys.insert(k);
            for (const auto& k : keys) {
                const bool same = recorded.contains(part) && recorded[part].contains(k) && current[part].contains(k) &&
                                  recorded[part][k] == current[part][k];
                if (!same) out.push_back(std::string(part) + "." + k);
            }
        }
        return out;
    }

    const Json* entry(Stage s) const {
        const auto name = std::string(stage_name(s));
        if (!manifest.contains("stages") || !manifest["stages"].contains(name)) return nullptr;
        return &manifest["stages"][name];
    }

    /// Why the recorded results of `s` cannot be used, or nullopt when they can.
    std::optional<std::string> stale_reason(Stage s) {
        const Json* e = entry(s);
        const std::string name(stage_name(s));
        if (!e) return "stage '" + name + "' has not been run in " + out.string();
        for (const auto& [file_name, sha] : (*e)["outputs"].items()) {
            const auto p = file(file_name);
            if (!fs::exists(p)) return file_name + " is missing from " + out.string();
            if (sums.of(p) != sha.get<std::string>())
                return file_name + " was modified after stage '" + name + "' wrote it (checksum mismatch)";
        }
        const auto diffs = differences((*e)["fingerprint"], fingerprint(s));
        if (!diffs.empty()) {
            std::string list;
            for (const auto& d : diffs) list += (list.empty() ? "" : ", ") + d;
            return "stage '" + name + "' results were produced from different inputs or settings (" + list + ")";
        }
        return std::nullopt;
    }

    void save() {
        tsv::AtomicWriter w(file(outputs::kManifest));
        w.stream() << manifest.dump(2) << '\n';
        w.commit();
    }
};

struct StageResult {
    Json counts = Json::object();
    std::vector<std::string> warnings;
};

std::string cohort_of(int first_year) {
    return first_year < 1960 ? std::string(kPreCohort) : assign_cohort(first_year);
}

StageResult run_ingest(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto& loaded = ctx.loaded();
    const auto& corpus = loaded.corpus;

    std::map<std::string, Gender, std::less<>> overrides;
    if (const auto g = cfg.genders_path(); !g.empty()) overrides = load_gender_overrides(g);
    NameTable names;
    if (!cfg.names.empty()) names = NameTable::load(cfg.names);

    StageResult r;
    std::vector<RosterEntry> roster;
    std::size_t labeled = 0, female = 0, male = 0;
    for (const auto& id : filter_eligible(corpus, cfg.eligibility)) {
        const auto& career = corpus.author(id);
        RosterEntry e;
        e.author_id = id;
        e.first_year = career.first_year();
        e.last_year = career.last_year();
        e.cohort = cohort_of(e.first_year);
        e.field = primary_field(corpus, career);
        if (const auto it = overrides.find(id); it != overrides.end())
            e.gender = {it->second, 1.0};
        else
            e.gender = infer_gender(career.name, names, cfg.gender_threshold);
        if (e.gender.value != Gender::Unknown) ++labeled;
        female += e.gender.value == Gender::Female;
        male += e.gender.value == Gender::Male;
        roster.push_back(std::move(e));
    }
    write_roster_tsv(ctx.file(outputs::kRoster), roster);

    std::size_t works = 0;
    for (const auto& w : corpus.works()) works += !w.bare;
    const auto& rep = loaded.report;
    r.counts = {{"works", works},
                {"references", corpus.reference_count()},
                {"authors_ingested", corpus.authors().size()},
                {"authors_eligible", roster.size()},
                {"authors_labeled", labeled},
                {"authors_female", female},
                {"authors_male", male},
                {"malformed_rows", rep.malformed_rows},
                {"dangling_references", rep.dangling_references},
                {"self_references", rep.self_references},
                {"duplicate_references", rep.duplicate_references},
                {"orphan_authorships", rep.orphan_authorships},
                {"unnamed_authors", rep.unnamed_authors}};
    r.warnings = rep.messages;
    if (cfg.genders_path().empty() && cfg.names.empty() && !roster.empty())
        r.warnings.push_back("no genders.tsv or name table given; every author is unlabeled");
    return r;
}

StageResult run_kcc(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto& corpus = ctx.loaded().corpus;
    const auto roster = read_roster_tsv(ctx.file(outputs::kRoster));

    KccConfig kc;
    kc.window = cfg.window;
    kc.weighting = cfg.weighting;
    kc.network.weighted = cfg.weighted_network;
    const ClusterFn cluster = make_infomap({.seed = cfg.seed, .trials = cfg.trials});

    std::vector<std::optional<KccSeries>> slots(roster.size());
    parallel_for(roster.size(), cfg.workers, [&](std::size_t i) {
        const auto& career = corpus.author(roster[i].author_id);
        if (career.span_years() < 2) return;
        slots[i] = kcc_series(corpus, roster[i].author_id, kc, cluster);
    });

    StageResult r;
    std::vector<KccSeries> series;
    std::size_t years = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]) {
            r.warnings.push_back("author " + roster[i].author_id + " skipped: career shorter than two years");
            continue;
        }
        years += slots[i]->size();
        series.push_back(std::move(*slots[i]));
    }
    write_series_tsv(ctx.file(outputs::kSeries), series);
    r.counts = {{"series_authors", series.size()},
                {"series_years", years},
                {"skipped_short_careers", roster.size() - series.size()}};
    return r;
}

StageResult run_dynamics(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto series = read_series_tsv(ctx.file(outputs::kSeries));
    std::vector<std::optional<AuthorIndicators>> slots(series.size());
    parallel_for(series.size(), cfg.workers, [&](std::size_t i) {
        const auto values = series[i].effective(cfg.inactive);
        if (values.size() < 2) return;
        slots[i] = AuthorIndicators{series[i].author_id, indicator_set(values, cfg.grid, cfg.period_length)};
    });

    StageResult r;
    std::vector<AuthorIndicators> rows;
    std::size_t invalid_kcs = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]) {
            r.warnings.push_back("author " + series[i].author_id + " skipped: fewer than two usable years");
            continue;
        }
        invalid_kcs += !slots[i]->indicators.kcs.has_value();
        rows.push_back(std::move(*slots[i]));
    }
    if (invalid_kcs > 0)
        r.warnings.push_back(std::to_string(invalid_kcs) + " author(s) with near-zero mean KCC; KCS marked invalid");
    write_indicators_tsv(ctx.file(outputs::kIndicators), rows, cfg.grid);
    r.counts = {{"indicator_authors", rows.size()},
                {"kcs_invalid", invalid_kcs},
                {"skipped_short_series", series.size() - rows.size()}};
    return r;
}

StageResult run_report(Context& ctx) {
    const auto& cfg = ctx.cfg;
    std::map<std::string, RosterEntry> roster;
    for (auto& e : read_roster_tsv(ctx.file(outputs::kRoster))) roster.emplace(e.author_id, std::move(e));

    std::vector<AuthorRecord> records;
    for (auto& row : read_indicators_tsv(ctx.file(outputs::kIndicators))) {
        const auto it = roster.find(row.author_id);
        if (it == roster.end())
            throw std::runtime_error("author " + row.author_id + " in indicators.tsv is missing from roster.tsv");
        bool has_label = false;
        for (const auto& p : row.indicators.grid) has_label |= p.label() == cfg.kcp_label;
        if (!has_label) throw std::invalid_argument("KCP label " + cfg.kcp_label + " is not in indicators.tsv");
        AuthorRecord rec;
        rec.author_id = row.author_id;
        rec.gender = it->second.gender.value;
        rec.cohort = it->second.cohort;
        rec.field = it->second.field;
        rec.indicators = std::move(row.indicators);
        records.push_back(std::move(rec));
    }

    const auto gaps = gap_table(records, cfg.kcp_label);
    write_gap_table_tsv(ctx.file(outputs::kGapTable), gaps);
    write_trend_tsv(ctx.file(outputs::kTrend), gaps);
    write_field_summary_tsv(ctx.file(outputs::kFieldSummary), field_summary(records, cfg.kcp_label));
    write_comparison_tsv(ctx.file(outputs::kComparison), compare_genders(records));

    StageResult r;
    std::size_t labeled = 0;
    for (const auto& rec : records) labeled += rec.gender != Gender::Unknown;
    r.counts = {{"report_authors", labeled}, {"report_cohorts", gaps.size()}};
    if (records.size() > labeled)
        r.warnings.push_back(std::to_string(records.size() - labeled) + " author(s) without a gender label left out of the gap tables");
    return r;
}

StageResult dispatch(Stage s, Context& ctx) {
    switch (s) {
        case Stage::Ingest: return run_ingest(ctx);
        case Stage::Kcc: return run_kcc(ctx);
        case Stage::Dynamics: return run_dynamics(ctx);
        case Stage::Report: return run_report(ctx);
    }
    return {};
}

Json load_manifest(const fs::path& path) {
    if (!fs::exists(path)) return Json::object();
    std::ifstream in(path);
    auto doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw StaleCacheError(path.string() + " is not a valid manifest; remove it to start over");
    return doc;
}

Context open_context(const RunConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    Context ctx{cfg, cfg.output_dir, load_manifest(cfg.output_dir / std::string(outputs::kManifest)), {}, {}};
    ctx.manifest["tool"] = "kcdyn";
    ctx.manifest["config"] = config_snapshot(cfg);
    if (!ctx.manifest.contains("counts")) ctx.manifest["counts"] = Json::object();
    if (!ctx.manifest.contains("warnings")) ctx.manifest["warnings"] = Json::object();
    if (!ctx.manifest.contains("stages")) ctx.manifest["stages"] = Json::object();
    return ctx;
}

void execute(Stage s, Context& ctx) {
    const std::string name(stage_name(s));
    ctx.log("[" + name + "] running");
    const auto t0 = std::chrono::steady_clock::now();
    StageResult result;
    try {
        const Json fp = ctx.fingerprint(s);
        result = dispatch(s, ctx);
        Json outs = Json::object();
        for (const auto& f : stage_outputs(s)) {
            ctx.sums.forget(ctx.file(f));
            outs[f] = ctx.sums.of(ctx.file(f));
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ctx.manifest["stages"][name] = {{"fingerprint", fp}, {"outputs", outs}, {"wall_seconds", secs}, {"reused", false}};
    } catch (const std::exception& e) {
        for (const auto& f : stage_outputs(s)) {
            std::error_code ec;
            fs::remove(ctx.file(f), ec);
            ctx.sums.forget(ctx.file(f));
        }
        ctx.manifest["stages"].erase(name);
        ctx.manifest["warnings"][name] = Json::array({std::string("failed: ") + e.what()});
        ctx.save();
        throw StageError(s, e.what());
    }
    if (s == Stage::Ingest) {
        const auto paths = ctx.cfg.corpus_paths();
        ctx.manifest["inputs"] = {{"works", ctx.sums.of(paths.works)},
                                  {"authorships", ctx.sums.of(paths.authorships)},
                                  {"references", ctx.sums.of(paths.references)},
                                  {"authors", ctx.sums.of(paths.authors)},
                                  {"genders", ctx.sums.of(ctx.cfg.genders_path())},
                                  {"names", ctx.sums.of(ctx.cfg.names)}};
    }
    for (const auto& [k, v] : result.counts.items()) ctx.manifest["counts"][k] = v;
    ctx.manifest["warnings"][name] = result.warnings;
    ctx.save();
    ctx.log("[" + name + "] done");
}

}  // namespace

CorpusPaths RunConfig::corpus_paths() const {
    auto p = CorpusPaths::in(input_dir);
    if (!works.empty()) p.works = works;
    if (!authorships.empty()) p.authorships = authorships;
    if (!references.empty()) p.references = references;
    if (!authors.empty()) p.authors = authors;
    return p;
}

fs::path RunConfig::genders_path() const {
    if (!genders.empty()) return genders;
    if (!input_dir.empty() && fs::exists(input_dir / "genders.tsv")) return input_dir / "genders.tsv";
    return {};
}

void RunConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (input_dir.empty() && (works.empty() || authorships.empty() || references.empty() || authors.empty()))
        fail("no input: give an input directory or all four corpus files");
    if (output_dir.empty()) fail("no output directory");
    if (eligibility.min_span < 1) fail("min_span must be >= 1");
    if (eligibility.start_lo > eligibility.start_hi) fail("start_lo must not exceed start_hi");
    if (!(gender_threshold >= 0.0 && gender_threshold <= 1.0)) fail("gender_threshold must lie in [0, 1]");
    if (window < 1) fail("window must be >= 1");
    if (trials < 1) fail("trials must be >= 1");
    if (workers < 1) fail("workers must be >= 1");
    if (grid.empty()) fail("persistence grid is empty");
    std::set<std::string> labels;
    for (const auto& p : grid) {
        if (p.tau < 0 || p.tau > 100 || p.min_duration < 1 || p.gap_tolerance < 0)
            fail("invalid persistence parameters " + p.label());
        if (!labels.insert(p.label()).second) fail("duplicate persistence measure " + p.label());
    }
    if (!labels.count(kcp_label)) fail("kcp_label " + kcp_label + " is not in the persistence grid");
}

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::Ingest: return "ingest";
        case Stage::Kcc: return "kcc";
        case Stage::Dynamics: return "dynamics";
        case Stage::Report: return "report";
    }
    return "?";
}

std::vector<Stage> all_stages() { return {Stage::Ingest, Stage::Kcc, Stage::Dynamics, Stage::Report}; }

StageError::StageError(Stage stage, const std::string& message)
    : std::runtime_error("stage '" + std::string(stage_name(stage)) + "' failed: " + message), stage_(stage) {}

void run_stage(Stage stage, const RunConfig& config) {
    Context ctx = open_context(config);
    for (Stage up : all_stages()) {
        if (up == stage) break;
        if (const auto why = ctx.stale_reason(up))
            throw StaleCacheError("refusing to run '" + std::string(stage_name(stage)) + "': " + *why +
                                  "; rerun `kcdyn " + std::string(stage_name(up)) + "` or `kcdyn run`");
    }
    execute(stage, ctx);
}

void run_pipeline(const RunConfig& config) {
    Context ctx = open_context(config);
    const auto t0 = std::chrono::steady_clock::now();
    for (Stage s : all_stages()) {
        if (!ctx.stale_reason(s)) {
            const std::string name(stage_name(s));
            ctx.log("[" + name + "] up to date, reusing cached outputs");
            ctx.manifest["stages"][name]["reused"] = true;
            ctx.manifest["stages"][name]["wall_seconds"] = 0.0;
            continue;
        }
        execute(s, ctx);
    }
    ctx.manifest["total_wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ctx.save();
}

void write_roster_tsv(const fs::path& path, std::span<const RosterEntry> rows) {
    tsv::AtomicWriter w(path);
    w.stream() << "author_id\tfirst_year\tlast_year\tcohort\tfield\tgender\tconfidence\n";
    for (const auto& e : rows)
        w.stream() << e.author_id << '\t' << e.first_year << '\t' << e.last_year << '\t' << e.cohort << '\t' << e.field
                   << '\t' << to_string(e.gender.value) << '\t' << tsv::format_double(e.gender.confidence) << '\n';
    w.commit();
}

std::vector<RosterEntry> read_roster_tsv(const fs::path& path) {
    tsv::Reader r(path);
    const auto c_author = r.require_column("author_id");
    const auto c_first = r.require_column("first_year");
    const auto c_last = r.require_column("last_year");
    const auto c_cohort = r.require_column("cohort");
    const auto c_field = r.require_column("field");
    const auto c_gender = r.require_column("gender");
    const auto c_conf = r.require_column("confidence");
    std::vector<RosterEntry> out;
    while (r.next()) {
        const auto& f = r.fields();
        const auto first = f.size() == r.header().size() ? tsv::parse_int(f[c_first]) : std::nullopt;
        const auto last = first ? tsv::parse_int(f[c_last]) : std::nullopt;
        const auto gender = last ? parse_gender(f[c_gender]) : std::nullopt;
        const auto conf = gender ? tsv::parse_double(f[c_conf]) : std::nullopt;
        if (!conf) throw std::runtime_error(path.string() + ":" + std::to_string(r.line_number()) + ": bad roster row");
        out.push_back({std::string(f[c_author]), static_cast<int>(*first), static_cast<int>(*last),
                       std::string(f[c_cohort]), std::string(f[c_field]), {*gender, *conf}});
    }
    return out;
}

}  // namespace kcdyn
