#include "kcdyn/conet.hpp"

#include <algorithm>
#include <unordered_map>

#include "kcdyn/tsv.hpp"

namespace kcdyn {

namespace {

using PairKey = std::uint64_t;

PairKey key(std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<PairKey>(a) << 32) | b;
}

/// Sorts pair keys and collapses duplicates into weighted edges.
std::vector<Edge> collapse(std::vector<PairKey>& keys, bool weighted) {
    std::sort(keys.begin(), keys.end());
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < keys.size();) {
        std::size_t j = i;
        while (j < keys.size() && keys[j] == keys[i]) ++j;
        edges.push_back({static_cast<std::uint32_t>(keys[i] >> 32), static_cast<std::uint32_t>(keys[i] & 0xffffffffu),
                         weighted ? static_cast<double>(j - i) : 1.0});
        i = j;
    }
    return edges;
}

std::uint32_t local_index(const std::vector<WorkIndex>& sorted_nodes, WorkIndex w) {
    return static_cast<std::uint32_t>(std::lower_bound(sorted_nodes.begin(), sorted_nodes.end(), w) - sorted_nodes.begin());
}

}  // namespace

ReferenceNetwork build_reference_conet(const Corpus& corpus, std::string_view author_id, int year,
                                       const NetworkOptions& options) {
    const auto& career = corpus.author(author_id);
    const auto pubs = career.works_in(year);

    ReferenceNetwork out;
    auto& nodes = out.graph.nodes;
    for (WorkIndex p : pubs) {
        const auto& refs = corpus.work(p).references;
        nodes.insert(nodes.end(), refs.begin(), refs.end());
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    out.occurrences.assign(nodes.size(), 0);

    std::vector<PairKey> keys;
    std::vector<std::uint32_t> local;
    for (WorkIndex p : pubs) {
        const auto& refs = corpus.work(p).references;
        local.clear();
        for (WorkIndex r : refs) local.push_back(local_index(nodes, r));
        for (auto i : local) ++out.occurrences[i];
        for (std::size_t i = 0; i < local.size(); ++i)
            for (std::size_t j = i + 1; j < local.size(); ++j) keys.push_back(key(local[i], local[j]));
    }
    out.graph.edges = collapse(keys, options.weighted);
    return out;
}

ForwardNetwork build_forward_conet(const Corpus& corpus, std::string_view author_id, int pub_year, int window,
                                   const NetworkOptions& options) {
    const auto& career = corpus.author(author_id);
    const auto pubs = career.works_in(pub_year);

    ForwardNetwork out;
    auto& nodes = out.graph.nodes;
    std::vector<Citation> events;
    for (WorkIndex p : pubs) {
        auto ce = citing_events(corpus, p, window);
        out.unknown_year_citers += ce.unknown_year;
        events.insert(events.end(), ce.events.begin(), ce.events.end());
    }
    for (const auto& e : events) nodes.push_back(e.citer);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    out.citing_year.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) out.citing_year[i] = *corpus.work(nodes[i]).year;

    // Invert citer reference lists, skipping the focal publications themselves.
    std::unordered_map<WorkIndex, std::vector<std::uint32_t>> holders;
    for (std::uint32_t i = 0; i < nodes.size(); ++i) {
        for (WorkIndex r : corpus.work(nodes[i]).references) {
            if (std::binary_search(pubs.begin(), pubs.end(), r)) continue;
            holders[r].push_back(i);
        }
    }
    std::vector<PairKey> keys;
    for (const auto& [ref, list] : holders)
        for (std::size_t i = 0; i < list.size(); ++i)
            for (std::size_t j = i + 1; j < list.size(); ++j) keys.push_back(key(list[i], list[j]));
    out.graph.edges = collapse(keys, options.weighted);
    return out;
}

void write_edge_list(const Corpus& corpus, const CoNetwork& network, const std::filesystem::path& path) {
    tsv::AtomicWriter w(path);
    w.stream() << "node_a\tnode_b\tweight\n";
    for (const auto& e : network.edges)
        w.stream() << corpus.work(network.nodes[e.a]).id << '\t' << corpus.work(network.nodes[e.b]).id << '\t'
                   << tsv::format_double(e.weight) << '\n';
    w.commit();
}

}  // namespace kcdyn
