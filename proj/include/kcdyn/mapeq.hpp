#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "kcdyn/conet.hpp"

namespace kcdyn {

/// Stationary random-walk flow on an undirected weighted graph.
///
/// node_flow[i] = strength(i) / sum of strengths (visit rate); edges carry
/// flow weight / total weight, i.e. the mass crossing the edge in both
/// directions together. Isolated nodes have zero flow.
struct FlowGraph {
    std::vector<double> node_flow;
    std::vector<Edge> edges;

    std::size_t node_count() const { return node_flow.size(); }
};

FlowGraph stationary_flow(const CoNetwork& network);

/// Flat (two-level) module assignment. Module ids are contiguous 0..module_count-1.
struct Partition {
    std::vector<std::uint32_t> assignment;
    std::uint32_t module_count = 0;
    double codelength = 0.0;  ///< bits
};

/// Relabels modules 0.. in order of first appearance and recounts.
Partition canonical_partition(std::span<const std::uint32_t> assignment);

/// Two-level map equation L(M) = q H(Q) + sum_i p_i H(P^i), in bits.
/// Labels may be arbitrary integers; throws std::invalid_argument when the
/// assignment does not cover every node.
double map_equation(const FlowGraph& flow, std::span<const std::uint32_t> assignment);
double map_equation(const FlowGraph& flow, const Partition& partition);

struct InfomapOptions {
    std::uint64_t seed = 0;
    int trials = 10;
};

/// Greedy map-equation minimization: node moves plus module aggregation,
/// repeated with fine-tuning until no improvement, best of `trials` seeded
/// restarts. The result never scores worse than the one-module or the
/// all-singleton partition. Zero-flow nodes become singleton modules.
Partition detect_communities(const CoNetwork& network, const InfomapOptions& options = {});

/// A clustering function as consumed by the entropy computations.
using ClusterFn = std::function<Partition(const CoNetwork&)>;

ClusterFn make_infomap(const InfomapOptions& options);

/// Partition dump: node (work id), module.
void write_partition(const Corpus& corpus, const CoNetwork& network, const Partition& partition,
                     const std::filesystem::path& path);

}  // namespace kcdyn
