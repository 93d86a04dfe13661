#include "kcdyn/mapeq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "kcdyn/tsv.hpp"

namespace kcdyn {

namespace {

constexpr double kMinImprovement = 1e-12;
// The KL pass is quadratic in the node count.
constexpr std::size_t kMaxRefineNodes = 400;
constexpr std::size_t kMaxExhaustiveKlNodes = 32;

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

/// One level of the optimization: leaf nodes or aggregated modules.
/// `out_flow` counts flow leaving the node in one direction, so for a leaf it
/// equals its visit rate. Adjacency stores one-directional flow.
struct LevelGraph {
    std::vector<double> flow;
    std::vector<double> out_flow;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;

    std::size_t size() const { return flow.size(); }
};

/// Running map-equation terms for one level's current module assignment.
class ModuleState {
public:
    ModuleState(const LevelGraph& g, std::vector<std::uint32_t> module_of, double leaf_entropy_term)
        : g_(g), module_of_(std::move(module_of)), node_term_(leaf_entropy_term) {
        const std::size_t n = g.size();
        exit_.assign(n, 0.0);
        flow_.assign(n, 0.0);
        members_.assign(n, 0);
        for (std::uint32_t v = 0; v < n; ++v) {
            const auto m = module_of_[v];
            flow_[m] += g.flow[v];
            ++members_[m];
        }
        for (std::uint32_t v = 0; v < n; ++v) {
            for (const auto& [u, f] : g.adj[v])
                if (module_of_[u] != module_of_[v]) exit_[module_of_[v]] += f;
        }
        for (std::uint32_t m = 0; m < n; ++m) {
            if (members_[m] == 0) free_.push_back(m);
            sum_exit_ += exit_[m];
            exit_term_ += plogp(exit_[m]);
            total_term_ += plogp(exit_[m] + flow_[m]);
        }
        std::reverse(free_.begin(), free_.end());
    }

    double codelength() const { return plogp(sum_exit_) - 2.0 * exit_term_ - node_term_ + total_term_; }

    /// Codelength change if `v` moved from its module to `target`.
    double delta(std::uint32_t v, std::uint32_t target, double to_old, double to_new) const {
        const auto old = module_of_[v];
        const double p = g_.flow[v];
        const double o = g_.out_flow[v];
        const double q_old = exit_[old], q_new = exit_[target];
        const double q_old2 = std::max(0.0, q_old - o + 2.0 * to_old);
        const double q_new2 = std::max(0.0, q_new + o - 2.0 * to_new);
        const double sum2 = sum_exit_ - q_old - q_new + q_old2 + q_new2;
        const double exit_term2 = exit_term_ - plogp(q_old) - plogp(q_new) + plogp(q_old2) + plogp(q_new2);
        const double total_term2 = total_term_ - plogp(q_old + flow_[old]) - plogp(q_new + flow_[target]) +
                                   plogp(q_old2 + flow_[old] - p) + plogp(q_new2 + flow_[target] + p);
        return (plogp(sum2) - 2.0 * exit_term2 - node_term_ + total_term2) - codelength();
    }

    void move(std::uint32_t v, std::uint32_t target, double to_old, double to_new) {
        const auto old = module_of_[v];
        const double p = g_.flow[v];
        const double o = g_.out_flow[v];
        sum_exit_ -= exit_[old] + exit_[target];
        exit_term_ -= plogp(exit_[old]) + plogp(exit_[target]);
        total_term_ -= plogp(exit_[old] + flow_[old]) + plogp(exit_[target] + flow_[target]);
        exit_[old] = std::max(0.0, exit_[old] - o + 2.0 * to_old);
        exit_[target] = std::max(0.0, exit_[target] + o - 2.0 * to_new);
        flow_[old] -= p;
        flow_[target] += p;
        sum_exit_ += exit_[old] + exit_[target];
        exit_term_ += plogp(exit_[old]) + plogp(exit_[target]);
        total_term_ += plogp(exit_[old] + flow_[old]) + plogp(exit_[target] + flow_[target]);
        if (--members_[old] == 0) free_.push_back(old);
        if (members_[target]++ == 0) free_.erase(std::find(free_.begin(), free_.end(), target));
        module_of_[v] = target;
    }

    std::uint32_t module_of(std::uint32_t v) const { return module_of_[v]; }
    std::uint32_t members(std::uint32_t m) const { return members_[m]; }
    bool has_free() const { return !free_.empty(); }
    std::uint32_t free_module() const { return free_.back(); }
    const std::vector<std::uint32_t>& assignment() const { return module_of_; }
    double exit(std::uint32_t m) const { return exit_[m]; }

private:
    const LevelGraph& g_;
    std::vector<std::uint32_t> module_of_;
    std::vector<double> exit_, flow_;
    std::vector<std::uint32_t> members_;
    std::vector<std::uint32_t> free_;
    double node_term_;
    double sum_exit_ = 0.0, exit_term_ = 0.0, total_term_ = 0.0;
};

template <class Rng>
void shuffle(std::vector<std::uint32_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

/// Sweeps nodes in random order, moving each to the neighbouring (or an empty)
/// module with the largest strict decrease. Returns true if anything moved.
template <class Rng>
bool local_moving(const LevelGraph& g, ModuleState& state, Rng& rng) {
    const std::size_t n = g.size();
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t i = 0; i < n; ++i) order[i] = i;

    std::vector<double> link(n, 0.0);
    std::vector<std::uint32_t> touched;
    bool any = false;
    for (int sweep = 0; sweep < 1000; ++sweep) {
        shuffle(order, rng);
        bool moved = false;
        for (auto v : order) {
            const auto old = state.module_of(v);
            touched.clear();
            for (const auto& [u, f] : g.adj[v]) {
                const auto m = state.module_of(u);
                if (link[m] == 0.0) touched.push_back(m);
                link[m] += f;
            }
            const double to_old = link[old];
            double best_delta = -kMinImprovement;
            std::uint32_t best = old;
            double best_link = 0.0;
            for (auto m : touched) {
                if (m == old) continue;
                const double d = state.delta(v, m, to_old, link[m]);
                if (d < best_delta) {
                    best_delta = d;
                    best = m;
                    best_link = link[m];
                }
            }
            if (state.members(old) > 1 && state.has_free()) {
                const auto m = state.free_module();
                const double d = state.delta(v, m, to_old, 0.0);
                if (d < best_delta) {
                    best_delta = d;
                    best = m;
                    best_link = 0.0;
                }
            }
            for (auto m : touched) link[m] = 0.0;
            if (best != old) {
                state.move(v, best, to_old, best_link);
                moved = true;
                any = true;
            }
        }
        if (!moved) break;
    }
    return any;
}

/// Collapses modules of `g` into nodes; `dense` receives old module -> new node.
LevelGraph aggregate(const LevelGraph& g, const ModuleState& state, std::vector<std::uint32_t>& dense) {
    const std::size_t n = g.size();
    dense.assign(n, UINT32_MAX);
    std::uint32_t count = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
        auto& d = dense[state.module_of(v)];
        if (d == UINT32_MAX) d = count++;
    }
    LevelGraph out;
    out.flow.assign(count, 0.0);
    out.out_flow.assign(count, 0.0);
    out.adj.assign(count, {});
    std::vector<std::unordered_map<std::uint32_t, double>> acc(count);
    for (std::uint32_t v = 0; v < n; ++v) {
        const auto mv = dense[state.module_of(v)];
        out.flow[mv] += g.flow[v];
        for (const auto& [u, f] : g.adj[v]) {
            const auto mu = dense[state.module_of(u)];
            if (mu != mv) acc[mv][mu] += f;
        }
    }
    for (std::uint32_t m = 0; m < count; ++m) {
        std::vector<std::pair<std::uint32_t, double>> row(acc[m].begin(), acc[m].end());
        std::sort(row.begin(), row.end());
        for (const auto& [u, f] : row) out.out_flow[m] += f;
        out.adj[m] = std::move(row);
    }
    return out;
}

/// Core loop: local moving then aggregation until the module count stops
/// shrinking. `leaf_modules` is the starting assignment of leaf nodes and
/// receives the result.
template <class Rng>
void optimize_levels(const LevelGraph& leaf, std::vector<std::uint32_t>& leaf_modules, double node_term, Rng& rng) {
    // Start at leaf level with the given modules, then climb.
    LevelGraph level = leaf;
    std::vector<std::uint32_t> level_of_leaf(leaf.size());
    for (std::uint32_t i = 0; i < leaf.size(); ++i) level_of_leaf[i] = i;
    std::vector<std::uint32_t> start = leaf_modules;

    for (;;) {
        ModuleState state(level, start, node_term);
        local_moving(level, state, rng);
        std::vector<std::uint32_t> dense;
        LevelGraph next = aggregate(level, state, dense);
        for (auto& l : level_of_leaf) l = dense[state.module_of(l)];
        if (next.size() == level.size()) break;
        level = std::move(next);
        start.resize(level.size());
        for (std::uint32_t i = 0; i < level.size(); ++i) start[i] = i;
    }
    leaf_modules = level_of_leaf;
}

/// Coarse-tune: split every module into submodules, then let whole submodules
/// move between modules starting from the current assignment.
template <class Rng>
void coarse_tune(const LevelGraph& leaf, std::vector<std::uint32_t>& leaf_modules, double node_term, Rng& rng) {
    const std::size_t n = leaf.size();
    std::vector<std::vector<std::uint32_t>> members(n);
    for (std::uint32_t v = 0; v < n; ++v) members[leaf_modules[v]].push_back(v);

    std::vector<std::uint32_t> sub_of(n), local(n);
    std::uint32_t sub_count = 0;
    for (const auto& group : members) {
        if (group.empty()) continue;
        for (std::uint32_t i = 0; i < group.size(); ++i) local[group[i]] = i;
        LevelGraph sub;
        sub.flow.resize(group.size());
        sub.out_flow.resize(group.size());
        sub.adj.resize(group.size());
        for (std::uint32_t i = 0; i < group.size(); ++i) {
            const auto v = group[i];
            sub.flow[i] = leaf.flow[v];
            sub.out_flow[i] = leaf.out_flow[v];
            for (const auto& [u, f] : leaf.adj[v])
                if (leaf_modules[u] == leaf_modules[v]) sub.adj[i].emplace_back(local[u], f);
        }
        std::vector<std::uint32_t> parts(group.size());
        for (std::uint32_t i = 0; i < parts.size(); ++i) parts[i] = i;
        optimize_levels(sub, parts, node_term, rng);
        std::uint32_t max_part = 0;
        for (std::uint32_t i = 0; i < group.size(); ++i) {
            sub_of[group[i]] = sub_count + parts[i];
            max_part = std::max(max_part, parts[i]);
        }
        sub_count += max_part + 1;
    }

    // Submodule graph, starting with each submodule in its parent module.
    ModuleState by_sub(leaf, sub_of, node_term);
    std::vector<std::uint32_t> dense;
    LevelGraph level = aggregate(leaf, by_sub, dense);
    std::vector<std::uint32_t> node_of_leaf(n);
    for (std::uint32_t v = 0; v < n; ++v) node_of_leaf[v] = dense[sub_of[v]];
    std::vector<std::uint32_t> parent(level.size());
    for (std::uint32_t v = 0; v < n; ++v) parent[node_of_leaf[v]] = leaf_modules[v];
    // Parent labels can exceed the submodule count; compact them.
    std::vector<std::uint32_t> compact(n, UINT32_MAX);
    std::uint32_t next = 0;
    for (auto& m : parent) {
        if (compact[m] == UINT32_MAX) compact[m] = next++;
        m = compact[m];
    }
    optimize_levels(level, parent, node_term, rng);
    for (std::uint32_t v = 0; v < n; ++v) leaf_modules[v] = parent[node_of_leaf[v]];
}

/// Kernighan-Lin style pass: repeatedly apply the best single-node move even
/// when it increases the codelength, locking each moved node, and keep the best
/// prefix of the sequence. Escapes optima that need several coordinated moves.
/// With `first` set, the opening move is restricted to that node.
void kl_refine(const LevelGraph& leaf, std::vector<std::uint32_t>& leaf_modules, double node_term,
               std::optional<std::uint32_t> first = std::nullopt) {
    const std::size_t n = leaf.size();
    ModuleState state(leaf, leaf_modules, node_term);
    std::vector<char> locked(n, 0);
    std::vector<double> link(n, 0.0);
    std::vector<std::uint32_t> touched;
    double best_len = state.codelength();
    std::vector<std::uint32_t> best = leaf_modules;

    for (std::size_t step = 0; step < n; ++step) {
        double move_delta = std::numeric_limits<double>::infinity();
        std::uint32_t move_node = 0, move_target = 0;
        double move_to_old = 0.0, move_to_new = 0.0;
        for (std::uint32_t v = 0; v < n; ++v) {
            if (locked[v] || (step == 0 && first && v != *first)) continue;
            const auto old = state.module_of(v);
            touched.clear();
            for (const auto& [u, f] : leaf.adj[v]) {
                const auto m = state.module_of(u);
                if (link[m] == 0.0) touched.push_back(m);
                link[m] += f;
            }
            const double to_old = link[old];
            auto consider = [&](std::uint32_t m, double to_new) {
                const double d = state.delta(v, m, to_old, to_new);
                if (d < move_delta) {
                    move_delta = d;
                    move_node = v;
                    move_target = m;
                    move_to_old = to_old;
                    move_to_new = to_new;
                }
            };
            for (auto m : touched)
                if (m != old) consider(m, link[m]);
            if (state.members(old) > 1 && state.has_free()) consider(state.free_module(), 0.0);
            for (auto m : touched) link[m] = 0.0;
        }
        if (!std::isfinite(move_delta)) break;
        state.move(move_node, move_target, move_to_old, move_to_new);
        locked[move_node] = 1;
        const double len = state.codelength();
        if (len < best_len - kMinImprovement) {
            best_len = len;
            best = state.assignment();
        }
    }
    leaf_modules = std::move(best);
}

double evaluate(const LevelGraph& leaf, const std::vector<std::uint32_t>& modules, double node_term) {
    // ModuleState requires labels < node count; relabel densely first.
    std::vector<std::uint32_t> dense(leaf.size(), UINT32_MAX), labels(leaf.size());
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < modules.size(); ++i) {
        auto& d = dense[modules[i]];
        if (d == UINT32_MAX) d = next++;
        labels[i] = d;
    }
    return ModuleState(leaf, std::move(labels), node_term).codelength();
}

std::uint32_t count_modules(const std::vector<std::uint32_t>& a) {
    std::vector<std::uint32_t> s = a;
    std::sort(s.begin(), s.end());
    return static_cast<std::uint32_t>(std::unique(s.begin(), s.end()) - s.begin());
}

}  // namespace

FlowGraph stationary_flow(const CoNetwork& network) {
    FlowGraph out;
    out.node_flow.assign(network.node_count(), 0.0);
    double total = 0.0;
    for (const auto& e : network.edges) total += e.weight;
    if (total <= 0.0) return out;
    for (const auto& e : network.edges) {
        out.node_flow[e.a] += e.weight / (2.0 * total);
        out.node_flow[e.b] += e.weight / (2.0 * total);
        out.edges.push_back({e.a, e.b, e.weight / total});
    }
    return out;
}

Partition canonical_partition(std::span<const std::uint32_t> assignment) {
    Partition p;
    std::unordered_map<std::uint32_t, std::uint32_t> relabel;
    p.assignment.reserve(assignment.size());
    for (auto m : assignment) {
        auto [it, inserted] = relabel.try_emplace(m, p.module_count);
        if (inserted) ++p.module_count;
        p.assignment.push_back(it->second);
    }
    return p;
}

double map_equation(const FlowGraph& flow, std::span<const std::uint32_t> assignment) {
    if (assignment.size() != flow.node_count())
        throw std::invalid_argument("partition does not cover every node of the flow graph");
    std::unordered_map<std::uint32_t, std::pair<double, double>> modules;  // exit, flow
    double node_term = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        modules[assignment[i]].second += flow.node_flow[i];
        node_term += plogp(flow.node_flow[i]);
    }
    for (const auto& e : flow.edges) {
        if (assignment[e.a] == assignment[e.b]) continue;
        // Half of the edge mass leaves each endpoint's module.
        modules[assignment[e.a]].first += e.weight / 2.0;
        modules[assignment[e.b]].first += e.weight / 2.0;
    }
    double sum_exit = 0.0, exit_term = 0.0, total_term = 0.0;
    for (const auto& [m, ef] : modules) {
        sum_exit += ef.first;
        exit_term += plogp(ef.first);
        total_term += plogp(ef.first + ef.second);
    }
    return plogp(sum_exit) - 2.0 * exit_term - node_term + total_term;
}

double map_equation(const FlowGraph& flow, const Partition& partition) {
    return map_equation(flow, std::span<const std::uint32_t>(partition.assignment));
}

Partition detect_communities(const CoNetwork& network, const InfomapOptions& options) {
    if (options.trials < 1) throw std::invalid_argument("trials must be >= 1");
    const std::size_t n = network.node_count();
    if (n == 0) return {};

    const FlowGraph flow = stationary_flow(network);

    // Active (positive-flow) nodes form the leaf level.
    std::vector<std::uint32_t> active, leaf_of(n, UINT32_MAX);
    for (std::uint32_t i = 0; i < n; ++i)
        if (flow.node_flow[i] > 0.0) {
            leaf_of[i] = static_cast<std::uint32_t>(active.size());
            active.push_back(i);
        }

    std::vector<std::uint32_t> best_leaf;
    if (!active.empty()) {
        LevelGraph leaf;
        leaf.flow.resize(active.size());
        leaf.out_flow.resize(active.size());
        leaf.adj.resize(active.size());
        double node_term = 0.0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            leaf.flow[i] = leaf.out_flow[i] = flow.node_flow[active[i]];
            node_term += plogp(leaf.flow[i]);
        }
        for (const auto& e : flow.edges) {
            const auto a = leaf_of[e.a], b = leaf_of[e.b];
            leaf.adj[a].emplace_back(b, e.weight / 2.0);
            leaf.adj[b].emplace_back(a, e.weight / 2.0);
        }

        double best_len = 0.0;
        std::uint32_t best_count = 0;
        auto consider = [&](std::vector<std::uint32_t> modules) {
            const double len = evaluate(leaf, modules, node_term);
            const auto count = count_modules(modules);
            const bool better = best_leaf.empty() || len < best_len - kMinImprovement ||
                                (len <= best_len + kMinImprovement && count < best_count);
            if (better) {
                best_leaf = std::move(modules);
                best_len = len;
                best_count = count;
            }
        };

        // Alternates fine-tuning (leaf moves from the current modules),
        // coarse-tuning (submodule moves) and KL passes until none improves.
        // `exhaustive_kl` adds, on small graphs, a KL pass opening with each node.
        auto polish = [&](std::vector<std::uint32_t>& modules, std::mt19937_64& rng, bool exhaustive_kl) {
            double len = evaluate(leaf, modules, node_term);
            for (int round = 0; round < 50; ++round) {
                bool improved = false;
                for (int kind = 0; kind < 3; ++kind) {
                    auto candidate = modules;
                    if (kind == 0)
                        optimize_levels(leaf, candidate, node_term, rng);
                    else if (kind == 1)
                        coarse_tune(leaf, candidate, node_term, rng);
                    else if (leaf.size() <= kMaxRefineNodes)
                        kl_refine(leaf, candidate, node_term);
                    if (kind == 2 && exhaustive_kl && leaf.size() <= kMaxExhaustiveKlNodes) {
                        double cand_len = evaluate(leaf, candidate, node_term);
                        for (std::uint32_t v = 0; v < leaf.size(); ++v) {
                            auto alt = modules;
                            kl_refine(leaf, alt, node_term, v);
                            const double alt_len = evaluate(leaf, alt, node_term);
                            if (alt_len < cand_len - kMinImprovement) {
                                candidate = std::move(alt);
                                cand_len = alt_len;
                            }
                        }
                    }
                    const double cand_len = evaluate(leaf, candidate, node_term);
                    if (cand_len < len - kMinImprovement) {
                        modules = std::move(candidate);
                        len = cand_len;
                        improved = true;
                    }
                }
                if (!improved) break;
            }
        };

        for (int trial = 0; trial < options.trials; ++trial) {
            std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(trial));
            std::vector<std::uint32_t> modules(active.size());
            for (std::uint32_t i = 0; i < modules.size(); ++i) modules[i] = i;
            optimize_levels(leaf, modules, node_term, rng);
            polish(modules, rng, false);
            consider(std::move(modules));
        }
        if (leaf.size() <= kMaxExhaustiveKlNodes) {
            std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(options.trials));
            auto modules = best_leaf;
            polish(modules, rng, true);
            consider(std::move(modules));
        }
        consider(std::vector<std::uint32_t>(active.size(), 0));
        {
            std::vector<std::uint32_t> singletons(active.size());
            for (std::uint32_t i = 0; i < singletons.size(); ++i) singletons[i] = i;
            consider(std::move(singletons));
        }
    }

    // Zero-flow nodes get fresh singleton labels beyond any leaf label.
    std::vector<std::uint32_t> raw(n);
    std::uint32_t fresh = static_cast<std::uint32_t>(active.size());
    for (std::uint32_t i = 0; i < n; ++i) raw[i] = leaf_of[i] == UINT32_MAX ? fresh++ : best_leaf[leaf_of[i]];
    Partition out = canonical_partition(raw);
    out.codelength = map_equation(flow, out);
    return out;
}

ClusterFn make_infomap(const InfomapOptions& options) {
    return [options](const CoNetwork& network) { return detect_communities(network, options); };
}

void write_partition(const Corpus& corpus, const CoNetwork& network, const Partition& partition,
                     const std::filesystem::path& path) {
    tsv::AtomicWriter w(path);
    w.stream() << "node\tmodule\n";
    for (std::size_t i = 0; i < network.nodes.size(); ++i)
        w.stream() << corpus.work(network.nodes[i]).id << '\t' << partition.assignment.at(i) << '\n';
    w.commit();
}

}  // namespace kcdyn
