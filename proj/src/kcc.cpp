#include "kcdyn/kcc.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kcdyn/tsv.hpp"

namespace kcdyn {

double entropy(std::span<const double> proportions) {
    if (proportions.empty()) return 0.0;
    double sum = 0.0;
    for (double p : proportions) {
        if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("proportion outside (0, 1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProportionTolerance) throw std::invalid_argument("proportions do not sum to 1");
    if (proportions.size() == 1) return 0.0;
    double h = 0.0;
    for (double p : proportions) h -= p * std::log2(p);
    return h;
}

std::vector<double> normalize_masses(std::span<const double> masses) {
    double total = 0.0;
    for (double m : masses) {
        if (m < 0.0) throw std::invalid_argument("negative mass");
        total += m;
    }
    std::vector<double> out;
    if (total <= 0.0) return out;
    for (double m : masses)
        if (m > 0.0) out.push_back(m / total);
    return out;
}

std::vector<double> module_proportions(const Partition& partition, std::span<const double> node_mass) {
    if (node_mass.size() != partition.assignment.size())
        throw std::invalid_argument("node mass does not match partition size");
    std::vector<double> per_module(partition.module_count, 0.0);
    for (std::size_t i = 0; i < node_mass.size(); ++i) per_module.at(partition.assignment[i]) += node_mass[i];
    return normalize_masses(per_module);
}

double source_entropy(const Corpus& corpus, std::string_view author_id, int year, const ClusterFn& cluster,
                      ReferenceWeighting weighting, const NetworkOptions& network) {
    const auto net = build_reference_conet(corpus, author_id, year, network);
    if (net.graph.empty()) return 0.0;
    const Partition partition = cluster(net.graph);
    std::vector<double> mass(net.occurrences.size());
    for (std::size_t i = 0; i < mass.size(); ++i)
        mass[i] = weighting == ReferenceWeighting::Occurrences ? static_cast<double>(net.occurrences[i]) : 1.0;
    return entropy(module_proportions(partition, mass));
}

std::vector<double> diffusion_profile(const Corpus& corpus, std::string_view author_id, int pub_year, int window,
                                      const ClusterFn& cluster, const NetworkOptions& network) {
    if (window < 1) throw std::invalid_argument("citation window must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(window), 0.0);
    const auto net = build_forward_conet(corpus, author_id, pub_year, window, network);
    if (net.graph.empty()) return out;
    const Partition partition = cluster(net.graph);
    std::vector<double> mass(net.graph.node_count());
    for (int offset = 0; offset < window; ++offset) {
        const int year = pub_year + offset;
        for (std::size_t i = 0; i < mass.size(); ++i) mass[i] = net.citing_year[i] == year ? 1.0 : 0.0;
        out[static_cast<std::size_t>(offset)] = entropy(module_proportions(partition, mass));
    }
    return out;
}

double diffusion_entropy(const Corpus& corpus, std::string_view author_id, int pub_year, int citing_year, int window,
                         const ClusterFn& cluster, const NetworkOptions& network) {
    if (citing_year < pub_year || citing_year > pub_year + window - 1)
        throw std::invalid_argument("citing year outside the citation window");
    return diffusion_profile(corpus, author_id, pub_year, window, cluster, network)
        .at(static_cast<std::size_t>(citing_year - pub_year));
}

KccYear kcc_year(const Corpus& corpus, std::string_view author_id, int year, const KccConfig& config,
                 const ClusterFn& cluster) {
    const auto& career = corpus.author(author_id);
    KccYear out;
    out.active = !career.works_in(year).empty();
    if (!out.active) {
        out.diffusion.assign(static_cast<std::size_t>(config.window), 0.0);
        out.value = config.inactive_fill;
        return out;
    }
    out.source = source_entropy(corpus, author_id, year, cluster, config.weighting, config.network);
    out.diffusion = diffusion_profile(corpus, author_id, year, config.window, cluster, config.network);
    out.value = out.source + std::accumulate(out.diffusion.begin(), out.diffusion.end(), 0.0);
    return out;
}

std::vector<double> KccSeries::effective(InactivePolicy policy) const {
    if (policy == InactivePolicy::Zero) return values;
    std::vector<double> out;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (active[i]) out.push_back(values[i]);
    return out;
}

KccSeries kcc_series(const Corpus& corpus, std::string_view author_id, const KccConfig& config,
                     const ClusterFn& cluster) {
    const auto& career = corpus.author(author_id);
    if (career.span_years() < 2)
        throw std::invalid_argument("author '" + std::string(author_id) + "' has a career span below two years");
    KccSeries s;
    s.author_id = career.id;
    s.start_year = career.first_year();
    for (int y = career.first_year(); y <= career.last_year(); ++y) {
        const auto k = kcc_year(corpus, author_id, y, config, cluster);
        s.values.push_back(k.value);
        s.active.push_back(k.active);
        s.source.push_back(k.source);
        s.diffusion.push_back(std::accumulate(k.diffusion.begin(), k.diffusion.end(), 0.0));
    }
    return s;
}

void write_series_tsv(const std::filesystem::path& path, std::span<const KccSeries> series) {
    tsv::AtomicWriter w(path);
    w.stream() << "author_id\tyear\tkcc\tactive\tsource\tdiffusion\n";
    auto component = [](const std::vector<double>& v, std::size_t i) {
        return i < v.size() ? tsv::format_double(v[i]) : std::string("0");
    };
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.values.size(); ++i)
            w.stream() << s.author_id << '\t' << s.start_year + static_cast<int>(i) << '\t'
                       << tsv::format_double(s.values[i]) << '\t' << (s.active[i] ? 1 : 0) << '\t'
                       << component(s.source, i) << '\t' << component(s.diffusion, i) << '\n';
    w.commit();
}

std::vector<KccSeries> read_series_tsv(const std::filesystem::path& path) {
    tsv::Reader r(path);
    const auto c_author = r.require_column("author_id");
    const auto c_year = r.require_column("year");
    const auto c_kcc = r.require_column("kcc");
    const auto c_active = r.require_column("active");
    const auto c_source = r.column("source");
    const auto c_diffusion = r.column("diffusion");
    std::vector<KccSeries> out;
    while (r.next()) {
        const auto& f = r.fields();
        auto bad = [&](const char* what) {
            return std::runtime_error(path.string() + ":" + std::to_string(r.line_number()) + ": " + what);
        };
        if (f.size() != r.header().size()) throw bad("wrong column count");
        const auto year = tsv::parse_int(f[c_year]);
        const auto value = tsv::parse_double(f[c_kcc]);
        if (!year || !value) throw bad("unparsable year or kcc");
        if (out.empty() || out.back().author_id != f[c_author]) {
            out.emplace_back();
            out.back().author_id = std::string(f[c_author]);
            out.back().start_year = static_cast<int>(*year);
        }
        auto& s = out.back();
        if (*year != s.start_year + static_cast<long>(s.values.size())) throw bad("years are not contiguous");
        s.values.push_back(*value);
        s.active.push_back(f[c_active] == "1");
        if (c_source && c_diffusion) {
            const auto src = tsv::parse_double(f[*c_source]);
            const auto dif = tsv::parse_double(f[*c_diffusion]);
            if (!src || !dif) throw bad("unparsable source or diffusion");
            s.source.push_back(*src);
            s.diffusion.push_back(*dif);
        }
    }
    return out;
}

}  // namespace kcdyn
