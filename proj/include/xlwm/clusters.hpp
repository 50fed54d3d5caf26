#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "xlwm/vocab.hpp"

namespace xlwm {

// Undirected weighted graph over full-word token ids. An edge's weight is the
// number of dictionary pairs linking its endpoints, accumulated across
// dictionaries. Pairs whose source or target word is not a full-word token are
// dropped and counted; this count is the coverage failure mode that drives the
// cross-lingual robustness gradient.
struct SemanticGraph {
    // token id -> (neighbor id -> weight); both directions stored.
    std::map<std::uint32_t, std::map<std::uint32_t, std::int64_t>> adjacency;
    std::uint64_t dropped_pairs = 0;  // pairs with a missing full-word token
    std::uint64_t self_pairs = 0;     // pairs whose two sides map to one token

    std::size_t node_count() const { return adjacency.size(); }
    std::int64_t total_edge_weight() const;  // each undirected edge counted once
};

SemanticGraph build_graph(const Vocabulary& vocab,
                          const std::vector<BilingualDictionary>& dicts);

struct LouvainResult {
    // Communities of graph nodes; each sorted ascending, list ordered by
    // minimum member id.
    std::vector<std::vector<std::uint32_t>> communities;
    // Modularity after every local-move pass, across all aggregation levels.
    std::vector<double> modularity_trace;
};

// Deterministic two-phase Louvain. Local moves iterate nodes in ascending id
// order; a node moves to the neighboring community with the largest positive
// modularity gain, ties resolved toward the lowest community id. Aggregation
// repeats until a level produces no move. Gain comparisons use exact integer
// arithmetic, so the outcome is identical across platforms.
LouvainResult louvain(const SemanticGraph& graph);

// Modularity of an assignment (node id -> community label) on the graph.
double modularity(const SemanticGraph& graph,
                  const std::map<std::uint32_t, std::uint32_t>& community_of);

// Total token-id -> cluster-id mapping with contiguous cluster ids 0..C-1.
struct ClusterMap {
    std::vector<std::uint32_t> cluster_of;  // indexed by token id
    std::uint32_t cluster_count = 0;

    std::uint32_t cluster(std::uint32_t token_id) const { return cluster_of.at(token_id); }

    nlohmann::json to_json() const;
    static ClusterMap from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static ClusterMap load(const std::string& path);
};

// Each community becomes one cluster; every vocabulary token not in any
// community becomes a singleton. Cluster ids are assigned to all clusters
// (communities and singletons alike) by ascending minimum member token id, so
// with no communities the map is the identity over token ids.
ClusterMap complete_cluster_map(const Vocabulary& vocab,
                                const std::vector<std::vector<std::uint32_t>>& communities);

}  // namespace xlwm
