#include <algorithm>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "kcdyn/conet.hpp"
#include "kcdyn/kcc.hpp"
#include "kcdyn/mapeq.hpp"
#include "kcdyn/pipeline.hpp"
#include "kcdyn/synth.hpp"

using namespace kcdyn;

namespace {

std::vector<PersistenceParams> parse_grid(const std::string& text) {
    if (text == "default") return default_persistence_grid();
    std::vector<PersistenceParams> grid;
    std::stringstream in(text);
    std::string label;
    while (std::getline(in, label, ',')) {
        const auto p = PersistenceParams::parse(label);
        if (!p) throw CLI::ValidationError("--grid", "bad persistence label '" + label + "' (want P<tau>_C<d>_G<g>)");
        grid.push_back(*p);
    }
    return grid;
}

/// Adds one option under its dashed and underscored spelling, so config
/// files can use either.
template <class T>
CLI::Option* flag(CLI::App& app, const std::string& name, T& target, const std::string& help) {
    std::string under = name;
    std::replace(under.begin(), under.end(), '-', '_');
    const std::string names = under == name ? "--" + name : "--" + name + ",--" + under;
    return app.add_option(names, target, help)->capture_default_str();
}

void inspect(const RunConfig& cfg, const std::string& author_id, int year, const std::string& dump_dir) {
    const auto loaded = load_corpus(cfg.corpus_paths());
    const auto& corpus = loaded.corpus;
    const auto& career = corpus.author(author_id);
    const ClusterFn cluster = make_infomap({.seed = cfg.seed, .trials = cfg.trials});
    NetworkOptions net;
    net.weighted = cfg.weighted_network;

    std::cout << "author\t" << author_id << "\t" << career.name << "\n";
    std::cout << "career\t" << career.first_year() << "-" << career.last_year() << "\n";
    std::cout << "works_in_" << year << "\t" << career.works_in(year).size() << "\n";

    const auto ref = build_reference_conet(corpus, author_id, year, net);
    const auto ref_part = cluster(ref.graph);
    std::cout << "reference_network\tnodes=" << ref.graph.nodes.size() << "\tedges=" << ref.graph.edges.size()
              << "\tmodules=" << ref_part.module_count << "\tcodelength=" << ref_part.codelength << "\n";

    KccConfig kc;
    kc.window = cfg.window;
    kc.weighting = cfg.weighting;
    kc.network = net;
    const auto y = kcc_year(corpus, author_id, year, kc, cluster);
    std::cout << "source_entropy\t" << y.source << "\n";
    const auto fwd = build_forward_conet(corpus, author_id, year, cfg.window, net);
    const auto fwd_part = cluster(fwd.graph);
    std::cout << "forward_network\tnodes=" << fwd.graph.nodes.size() << "\tedges=" << fwd.graph.edges.size()
              << "\tmodules=" << fwd_part.module_count << "\tcodelength=" << fwd_part.codelength << "\n";
    for (std::size_t k = 0; k < y.diffusion.size(); ++k) {
        const int citing = year + static_cast<int>(k);
        const auto citers = std::count(fwd.citing_year.begin(), fwd.citing_year.end(), citing);
        std::cout << "diffusion\t" << citing << "\tciters=" << citers << "\tentropy=" << y.diffusion[k] << "\n";
    }
    std::cout << "kcc\t" << y.value << "\tactive=" << y.active << "\n";
    if (!dump_dir.empty()) {
        const std::filesystem::path d(dump_dir);
        write_edge_list(corpus, ref.graph, d / "reference_edges.tsv");
        write_partition(corpus, ref.graph, ref_part, d / "reference_modules.tsv");
        write_edge_list(corpus, fwd.graph, d / "forward_edges.tsv");
        write_partition(corpus, fwd.graph, fwd_part, d / "forward_modules.tsv");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-combination career dynamics from a citation corpus"};
    app.set_config("--config", "", "key=value file of option values");
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    std::string input, works, authorships, references, authors, genders, names;
    std::string out = cfg.output_dir.string();
    std::string inactive = "zero", weighting = "occurrences", network = "weighted", grid = "default",
                period = "highlight";
    bool quiet = false;

    flag(app, "input", input, "directory holding works/authorships/references/authors.tsv");
    flag(app, "out", out, "output directory");
    flag(app, "works", works, "works.tsv path (overrides --input)");
    flag(app, "authorships", authorships, "authorships.tsv path");
    flag(app, "references", references, "references.tsv path");
    flag(app, "authors", authors, "authors.tsv path");
    flag(app, "genders", genders, "author_id/gender labels (default <input>/genders.tsv)");
    flag(app, "names", names, "given-name gender table (name, label, probability)");
    flag(app, "min-span", cfg.eligibility.min_span, "minimum career span in years");
    flag(app, "start-lo", cfg.eligibility.start_lo, "earliest first-publication year");
    flag(app, "start-hi", cfg.eligibility.start_hi, "latest first-publication year");
    flag(app, "gender-threshold", cfg.gender_threshold, "minimum name-table probability for a label");
    flag(app, "window", cfg.window, "citation window in years");
    flag(app, "weighting", weighting, "reference mass: occurrences|distinct")
        ->check(CLI::IsMember({"occurrences", "distinct"}));
    flag(app, "network", network, "co-citation edge weights: weighted|unweighted")
        ->check(CLI::IsMember({"weighted", "unweighted"}));
    flag(app, "seed", cfg.seed, "clustering seed (synth: generator seed)");
    flag(app, "trials", cfg.trials, "clustering restarts");
    flag(app, "inactive", inactive, "inactive years: zero|skip")->check(CLI::IsMember({"zero", "skip"}));
    flag(app, "grid", grid, "comma-separated persistence labels, or 'default'");
    flag(app, "kcp-period-length", period, "KCP period length: highlight|calendar")
        ->check(CLI::IsMember({"highlight", "calendar"}));
    flag(app, "kcp-label", cfg.kcp_label, "persistence measure used in the gap tables");
    flag(app, "workers", cfg.workers, "worker threads");
    app.add_flag("-q,--quiet", quiet, "no progress lines");

    std::map<std::string, Stage> stage_cmds;
    for (Stage s : all_stages()) {
        const std::string name(stage_name(s));
        app.add_subcommand(name, "run the " + name + " stage from cached upstream outputs");
        stage_cmds.emplace(name, s);
    }
    app.add_subcommand("run", "run every stage, reusing up-to-date cached stages");

    auto* synth = app.add_subcommand("synth", "write a synthetic two-group corpus with ground truth");
    int n_per_group = 500;
    std::string preset = "contrast";
    synth->add_option("--n", n_per_group, "authors per group")->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--preset", preset, "regime preset")->capture_default_str()->check(CLI::IsMember(preset_names()));

    auto* insp = app.add_subcommand("inspect", "print one author-year's networks and partitions");
    std::string author_id, dump_dir;
    int year = 0;
    insp->add_option("--author", author_id, "author id")->required();
    insp->add_option("--year", year, "publication year")->required();
    insp->add_option("--dump", dump_dir, "directory for edge lists and module assignments");

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.input_dir = input;
        cfg.output_dir = out;
        cfg.works = works;
        cfg.authorships = authorships;
        cfg.references = references;
        cfg.authors = authors;
        cfg.genders = genders;
        cfg.names = names;
        cfg.inactive = inactive == "zero" ? InactivePolicy::Zero : InactivePolicy::Skip;
        cfg.weighting = weighting == "occurrences" ? ReferenceWeighting::Occurrences : ReferenceWeighting::Distinct;
        cfg.weighted_network = network == "weighted";
        cfg.grid = parse_grid(grid);
        cfg.period_length = period == "highlight" ? PeriodLength::HighlightYears : PeriodLength::CalendarSpan;
        if (!quiet) cfg.log = [](std::string_view msg) { std::cerr << msg << '\n'; };

        const auto* sub = app.get_subcommands().front();
        const std::string cmd = sub->get_name();
        if (cmd == "synth") {
            write_population(generate_population(preset_regimes(preset), n_per_group, cfg.seed), cfg.output_dir);
            if (!quiet) std::cerr << "wrote " << 2 * n_per_group << " authors to " << cfg.output_dir.string() << '\n';
        } else if (cmd == "inspect") {
            if (!dump_dir.empty()) std::filesystem::create_directories(dump_dir);
            inspect(cfg, author_id, year, dump_dir);
        } else if (cmd == "run") {
            run_pipeline(cfg);
        } else {
            run_stage(stage_cmds.at(cmd), cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "kcdyn: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
