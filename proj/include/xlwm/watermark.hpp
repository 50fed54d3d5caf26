#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "xlwm/clusters.hpp"
#include "xlwm/vocab.hpp"

namespace xlwm {

enum class SeedScheme { MinHash };

struct WatermarkParams {
    std::uint64_t key = 0;
    double gamma = 0.25;          // green fraction of the partition domain
    double delta = 2.0;           // additive logit bias for green entries
    std::uint32_t context_width = 1;
    SeedScheme scheme = SeedScheme::MinHash;

    void validate() const;  // gamma in (0,1), delta >= 0, context_width >= 1

    // {"key": decimal string, "gamma", "delta", "context_width", "scheme"}
    nlohmann::json to_json() const;
    static WatermarkParams from_json(const nlohmann::json& j);
    static WatermarkParams load(const std::string& path);
    void save(const std::string& path) const;
};

// Pseudo-random green/red split of a domain [0..domain_size-1].
struct GreenMask {
    std::uint32_t domain_size = 0;
    std::vector<std::uint32_t> green_ids;  // sorted ascending
    std::vector<std::uint8_t> member;      // bitmap, size domain_size

    bool is_green(std::uint32_t id) const { return member[id] != 0; }
};

// The partition domain: raw token ids (KGW) or semantic cluster ids (X-KGW).
enum class Domain { Token, Cluster };

struct DetectionResult {
    std::uint64_t scored_tokens = 0;  // T
    std::uint64_t green_hits = 0;     // g
    double z = 0.0;                   // (g - gamma*T) / sqrt(T*gamma*(1-gamma))
};

// minhash seeding: minimum of mix64(key XOR mix64(c)) over the last
// context_width ids c of the context.
std::uint64_t seed_from_context(const WatermarkParams& params,
                                std::span<const std::uint32_t> context_ids);

// Fisher-Yates shuffle of the domain driven by a splitmix64 stream seeded with
// `seed`; green = first floor(gamma * domain_size) shuffled entries.
GreenMask partition(std::uint64_t seed, std::uint32_t domain_size, double gamma);

// out[i] = logits[i] + delta for green token ids, logits[i] otherwise.
std::vector<double> bias_logits(std::vector<double> logits,
                                const std::vector<std::uint32_t>& green_token_ids,
                                double delta);

double z_statistic(std::uint64_t green_hits, std::uint64_t scored_tokens, double gamma);

// Memoizes partitions by seed for one scoring or generation run. Not shared
// across threads; create one per call site.
class PartitionCache {
public:
    PartitionCache(std::uint32_t domain_size, double gamma)
        : domain_size_(domain_size), gamma_(gamma) {}

    const GreenMask& get(std::uint64_t seed);

private:
    std::uint32_t domain_size_;
    double gamma_;
    std::unordered_map<std::uint64_t, GreenMask> memo_;
};

// Scores positions context_width..end of the sequence: each position's domain
// id is green or red under the partition seeded from its context window.
// vocab_size bounds token ids and is the token-domain size; the cluster
// domain takes its size from the cluster map.
DetectionResult score_sequence(const TokenSequence& seq, const WatermarkParams& params,
                               std::uint32_t vocab_size, Domain domain = Domain::Token,
                               const ClusterMap* clusters = nullptr);

}  // namespace xlwm
