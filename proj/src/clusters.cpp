#include "xlwm/clusters.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "xlwm/error.hpp"

namespace xlwm {

std::int64_t SemanticGraph::total_edge_weight() const {
    std::int64_t doubled = 0;
    for (const auto& [node, nbrs] : adjacency) {
        for (const auto& [nbr, w] : nbrs) {
            (void)nbr;
            doubled += w;
        }
    }
    return doubled / 2;
}

SemanticGraph build_graph(const Vocabulary& vocab,
                          const std::vector<BilingualDictionary>& dicts) {
    SemanticGraph graph;
    for (const BilingualDictionary& dict : dicts) {
        for (const auto& [src, tgt] : dict.pairs) {
            auto a = vocab.word_id(src);
            auto b = vocab.word_id(tgt);
            if (!a || !b) {
                ++graph.dropped_pairs;
                continue;
            }
            if (*a == *b) {
                ++graph.self_pairs;
                continue;
            }
            ++graph.adjacency[*a][*b];
            ++graph.adjacency[*b][*a];
        }
    }
    return graph;
}

namespace {

// Internal Louvain state over a compacted node index space. The adjacency
// uses the convention A[u][u] = 2 * (aggregated intra weight), which keeps
// degrees, 2m and all modularity gains in exact integer arithmetic.
struct Level {
    std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> adj;
    std::vector<std::int64_t> degree;
    std::int64_t two_m = 0;

    std::size_t size() const { return adj.size(); }
};

// Q * (2m)^2 for a community assignment; constant denominator across passes
// and levels of one run, so monotonicity can be asserted on exact integers.
std::int64_t q_numerator(const Level& level, const std::vector<std::uint32_t>& community) {
    std::uint32_t labels = *std::max_element(community.begin(), community.end()) + 1;
    std::vector<std::int64_t> sigma_in(labels, 0), sigma_tot(labels, 0);
    for (std::size_t u = 0; u < level.size(); ++u) {
        sigma_tot[community[u]] += level.degree[u];
        for (const auto& [v, w] : level.adj[u]) {
            if (community[u] == community[v]) sigma_in[community[u]] += w;
        }
    }
    std::int64_t num = 0;
    for (std::uint32_t c = 0; c < labels; ++c) {
        num += level.two_m * sigma_in[c] - sigma_tot[c] * sigma_tot[c];
    }
    return num;
}

}  // namespace

LouvainResult louvain(const SemanticGraph& graph) {
    LouvainResult result;

    std::vector<std::uint32_t> node_ids;
    node_ids.reserve(graph.adjacency.size());
    for (const auto& [id, nbrs] : graph.adjacency) {
        (void)nbrs;
        node_ids.push_back(id);
    }

    if (node_ids.empty()) return result;

    std::map<std::uint32_t, std::uint32_t> index_of;
    for (std::uint32_t i = 0; i < node_ids.size(); ++i) index_of[node_ids[i]] = i;

    Level level;
    level.adj.resize(node_ids.size());
    level.degree.assign(node_ids.size(), 0);
    for (const auto& [id, nbrs] : graph.adjacency) {
        std::uint32_t u = index_of[id];
        for (const auto& [nbr, w] : nbrs) {
            level.adj[u].emplace_back(index_of[nbr], w);
            level.degree[u] += w;
            level.two_m += w;
        }
    }

    // membership[i] = current top-level community of original node i
    std::vector<std::uint32_t> membership(node_ids.size());
    std::iota(membership.begin(), membership.end(), 0u);

    if (level.two_m == 0) {
        // Edgeless graph: every node is its own community.
        for (std::uint32_t id : node_ids) result.communities.push_back({id});
        return result;
    }

    const double q_denom =
        static_cast<double>(level.two_m) * static_cast<double>(level.two_m);

    while (true) {
        std::vector<std::uint32_t> community(level.size());
        std::iota(community.begin(), community.end(), 0u);
        std::vector<std::int64_t> sigma_tot = level.degree;

        bool any_move = false;
        bool moved_this_pass = true;
        while (moved_this_pass) {
            moved_this_pass = false;
            for (std::size_t u = 0; u < level.size(); ++u) {
                const std::uint32_t old_c = community[u];

                // Weight from u to each neighboring community. The self-loop
                // moves with u, contributing equally to every candidate, so
                // it drops out of the comparison.
                std::map<std::uint32_t, std::int64_t> weight_to;
                for (const auto& [v, w] : level.adj[u]) {
                    if (v == static_cast<std::uint32_t>(u)) continue;
                    weight_to[community[v]] += w;
                }

                sigma_tot[old_c] -= level.degree[u];
                weight_to.emplace(old_c, 0);  // staying put is always a candidate

                // gain(C) * 2m^2 = 2m * k_{u,in}(C) - sigma_tot(C) * k_u
                std::int64_t best_score = 0;
                std::uint32_t best_c = old_c;
                bool first = true;
                std::int64_t old_score = 0;
                for (const auto& [c, k_in] : weight_to) {
                    const std::int64_t score =
                        level.two_m * k_in - sigma_tot[c] * level.degree[u];
                    if (c == old_c) old_score = score;
                    if (first || score > best_score) {
                        best_score = score;
                        best_c = c;
                        first = false;
                    }
                    // ties resolve to the lowest community id: map order
                    // already visits candidates ascending, so strictly-greater
                    // comparison keeps the first best.
                }

                const std::uint32_t target = (best_score > old_score) ? best_c : old_c;
                sigma_tot[target] += level.degree[u];
                if (target != old_c) {
                    community[u] = target;
                    moved_this_pass = true;
                    any_move = true;
                }
            }
            result.modularity_trace.push_back(
                static_cast<double>(q_numerator(level, community)) / q_denom);
        }

        if (!any_move) break;

        // Relabel communities compactly, ordered by their lowest member.
        std::map<std::uint32_t, std::uint32_t> relabel;
        std::uint32_t n_comm = 0;
        for (std::size_t u = 0; u < level.size(); ++u) {
            if (relabel.emplace(community[u], n_comm).second) ++n_comm;
        }
        for (std::size_t u = 0; u < level.size(); ++u) community[u] = relabel[community[u]];

        for (std::uint32_t& m : membership) m = community[m];

        if (n_comm == level.size()) break;  // nothing merged, fixed point

        // Aggregate: communities become super-nodes. Intra-community weight
        // lands on the diagonal, which the doubled convention handles
        // naturally (each internal edge contributes from both endpoints).
        Level next_level;
        next_level.adj.resize(n_comm);
        next_level.degree.assign(n_comm, 0);
        next_level.two_m = level.two_m;
        std::vector<std::map<std::uint32_t, std::int64_t>> agg(n_comm);
        for (std::size_t u = 0; u < level.size(); ++u) {
            for (const auto& [v, w] : level.adj[u]) {
                agg[community[u]][community[v]] += w;
            }
        }
        for (std::uint32_t c = 0; c < n_comm; ++c) {
            for (const auto& [d, w] : agg[c]) {
                next_level.adj[c].emplace_back(d, w);
                next_level.degree[c] += w;
            }
        }
        level = std::move(next_level);
    }

    // Collect communities of original token ids, canonical order.
    std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
    for (std::size_t i = 0; i < node_ids.size(); ++i) {
        groups[membership[i]].push_back(node_ids[i]);
    }
    for (auto& [label, members] : groups) {
        (void)label;
        std::sort(members.begin(), members.end());
        result.communities.push_back(std::move(members));
    }
    std::sort(result.communities.begin(), result.communities.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return result;
}

double modularity(const SemanticGraph& graph,
                  const std::map<std::uint32_t, std::uint32_t>& community_of) {
    std::int64_t two_m = 0;
    for (const auto& [u, nbrs] : graph.adjacency) {
        (void)u;
        for (const auto& [v, w] : nbrs) {
            (void)v;
            two_m += w;
        }
    }
    if (two_m == 0) return 0.0;

    std::map<std::uint32_t, std::int64_t> sigma_in, sigma_tot;
    for (const auto& [u, nbrs] : graph.adjacency) {
        const std::uint32_t cu = community_of.at(u);
        for (const auto& [v, w] : nbrs) {
            sigma_tot[cu] += w;
            if (community_of.at(v) == cu) sigma_in[cu] += w;
        }
    }
    double q = 0.0;
    const double m2 = static_cast<double>(two_m);
    for (const auto& [c, tot] : sigma_tot) {
        const double in = static_cast<double>(sigma_in.count(c) ? sigma_in[c] : 0);
        q += in / m2 - (static_cast<double>(tot) / m2) * (static_cast<double>(tot) / m2);
    }
    return q;
}

ClusterMap complete_cluster_map(const Vocabulary& vocab,
                                const std::vector<std::vector<std::uint32_t>>& communities) {
    const std::uint32_t n = static_cast<std::uint32_t>(vocab.size());
    std::vector<bool> covered(n, false);
    for (const auto& community : communities) {
        if (community.empty()) throw Error("bad-communities", "empty community");
        for (std::uint32_t id : community) {
            if (id >= n) throw Error("bad-communities", "token id out of range");
            if (covered[id]) throw Error("bad-communities", "token in two communities");
            covered[id] = true;
        }
    }

    // All clusters (communities and singletons) ordered by minimum member id.
    std::vector<std::pair<std::uint32_t, const std::vector<std::uint32_t>*>> ordered;
    ordered.reserve(communities.size());
    for (const auto& community : communities) {
        ordered.emplace_back(*std::min_element(community.begin(), community.end()),
                             &community);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ClusterMap map;
    map.cluster_of.assign(n, 0);
    std::uint32_t next_cluster = 0;
    std::size_t ci = 0;
    for (std::uint32_t id = 0; id < n; ++id) {
        if (ci < ordered.size() && ordered[ci].first == id) {
            for (std::uint32_t member : *ordered[ci].second) {
                map.cluster_of[member] = next_cluster;
            }
            ++next_cluster;
            ++ci;
        } else if (!covered[id]) {
            map.cluster_of[id] = next_cluster;
            ++next_cluster;
        }
    }
    map.cluster_count = next_cluster;
    return map;
}

nlohmann::json ClusterMap::to_json() const {
    return {{"C", cluster_count}, {"map", cluster_of}};
}

ClusterMap ClusterMap::from_json(const nlohmann::json& j) {
    ClusterMap map;
    map.cluster_count = j.at("C").get<std::uint32_t>();
    map.cluster_of = j.at("map").get<std::vector<std::uint32_t>>();
    for (std::uint32_t c : map.cluster_of) {
        if (c >= map.cluster_count) {
            throw Error("bad-cluster-map", "cluster id out of range");
        }
    }
    return map;
}

void ClusterMap::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("io-error", "cannot write " + path);
    out << to_json().dump(2) << "\n";
}

ClusterMap ClusterMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

}  // namespace xlwm
