#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "kcdyn/corpus.hpp"

namespace kcdyn {

/// Undirected weighted edge between node indices a < b.
struct Edge {
    std::uint32_t a;
    std::uint32_t b;
    double weight;
};

/// Undirected weighted graph over works. Edges are canonical (a < b),
/// sorted by (a, b), with weight >= 1 and no self-loops.
struct CoNetwork {
    std::vector<WorkIndex> nodes;
    std::vector<Edge> edges;

    std::size_t node_count() const { return nodes.size(); }
    bool empty() const { return nodes.empty(); }
};

/// Co-citation network for one author-year plus per-node reference multiplicity
/// (how many of that year's publications list the node).
struct ReferenceNetwork {
    CoNetwork graph;
    std::vector<unsigned> occurrences;
};

/// Forward network for one author publication year; each node keeps its citing year.
struct ForwardNetwork {
    CoNetwork graph;
    std::vector<int> citing_year;
    std::size_t unknown_year_citers = 0;
};

struct NetworkOptions {
    /// When false every present edge gets weight 1 (sensitivity mode).
    bool weighted = true;
};

/// Nodes are the union of references of the author's `year` publications; every
/// unordered pair within one reference list adds 1 to its edge.
ReferenceNetwork build_reference_conet(const Corpus& corpus, std::string_view author_id, int year,
                                       const NetworkOptions& options = {});

/// Nodes are the works citing any of the author's `pub_year` publications within
/// `window` years. Two citers are linked with weight equal to the number of
/// references they share, not counting the author's own `pub_year` publications.
ForwardNetwork build_forward_conet(const Corpus& corpus, std::string_view author_id, int pub_year, int window,
                                   const NetworkOptions& options = {});

/// Edge-list dump: node_a, node_b, weight (work ids).
void write_edge_list(const Corpus& corpus, const CoNetwork& network, const std::filesystem::path& path);

}  // namespace kcdyn
