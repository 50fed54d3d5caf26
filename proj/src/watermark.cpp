#include "xlwm/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "xlwm/error.hpp"
#include "xlwm/rng.hpp"

namespace xlwm {

void WatermarkParams::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw Error("bad-params", "gamma must be in (0,1)");
    }
    if (!(delta >= 0.0)) {
        throw Error("bad-params", "delta must be non-negative");
    }
    if (context_width < 1) {
        throw Error("bad-params", "context_width must be >= 1");
    }
}

nlohmann::json WatermarkParams::to_json() const {
    return {{"key", std::to_string(key)},
            {"gamma", gamma},
            {"delta", delta},
            {"context_width", context_width},
            {"scheme", "minhash"}};
}

WatermarkParams WatermarkParams::from_json(const nlohmann::json& j) {
    WatermarkParams p;
    const auto& key = j.at("key");
    if (key.is_string()) {
        p.key = std::stoull(key.get<std::string>());
    } else {
        p.key = key.get<std::uint64_t>();
    }
    p.gamma = j.at("gamma").get<double>();
    p.delta = j.at("delta").get<double>();
    p.context_width = j.at("context_width").get<std::uint32_t>();
    if (j.at("scheme").get<std::string>() != "minhash") {
        throw Error("bad-params", "unknown seeding scheme");
    }
    p.validate();
    return p;
}

WatermarkParams WatermarkParams::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

void WatermarkParams::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("io-error", "cannot write " + path);
    out << to_json().dump(2) << "\n";
}

std::uint64_t seed_from_context(const WatermarkParams& params,
                                std::span<const std::uint32_t> context_ids) {
    const std::size_t h = params.context_width;
    if (context_ids.size() < h) {
        throw Error("insufficient-context",
                    "need " + std::to_string(h) + " context ids, got " +
                        std::to_string(context_ids.size()));
    }
    std::uint64_t seed = ~0ULL;
    for (std::size_t i = context_ids.size() - h; i < context_ids.size(); ++i) {
        seed = std::min(seed, mix64(params.key ^ mix64(context_ids[i])));
    }
    return seed;
}

GreenMask partition(std::uint64_t seed, std::uint32_t domain_size, double gamma) {
    if (domain_size < 1) throw Error("bad-params", "domain_size must be >= 1");
    const auto green_count = static_cast<std::size_t>(
        std::floor(gamma * static_cast<double>(domain_size)));
    std::vector<std::uint32_t> shuffled = shuffled_identity(seed, domain_size);

    GreenMask mask;
    mask.domain_size = domain_size;
    mask.green_ids.assign(shuffled.begin(), shuffled.begin() + green_count);
    std::sort(mask.green_ids.begin(), mask.green_ids.end());
    mask.member.assign(domain_size, 0);
    for (std::uint32_t id : mask.green_ids) mask.member[id] = 1;
    return mask;
}

std::vector<double> bias_logits(std::vector<double> logits,
                                const std::vector<std::uint32_t>& green_token_ids,
                                double delta) {
    for (std::uint32_t id : green_token_ids) {
        if (id >= logits.size()) {
            throw Error("bad-green-id", "green id " + std::to_string(id) +
                                            " out of range for " +
                                            std::to_string(logits.size()) + " logits");
        }
        logits[id] += delta;
    }
    return logits;
}

double z_statistic(std::uint64_t green_hits, std::uint64_t scored_tokens, double gamma) {
    const double t = static_cast<double>(scored_tokens);
    const double g = static_cast<double>(green_hits);
    return (g - gamma * t) / std::sqrt(t * gamma * (1.0 - gamma));
}

const GreenMask& PartitionCache::get(std::uint64_t seed) {
    auto it = memo_.find(seed);
    if (it != memo_.end()) return it->second;
    return memo_.emplace(seed, partition(seed, domain_size_, gamma_)).first->second;
}

DetectionResult score_sequence(const TokenSequence& seq, const WatermarkParams& params,
                               std::uint32_t vocab_size, Domain domain,
                               const ClusterMap* clusters) {
    params.validate();
    const std::size_t h = params.context_width;
    if (seq.ids.size() < h + 1) {
        throw Error("too-short", "sequence of " + std::to_string(seq.ids.size()) +
                                     " tokens needs at least " + std::to_string(h + 1));
    }
    if (domain == Domain::Cluster && clusters == nullptr) {
        throw Error("missing-cluster-map", "cluster domain requires a cluster map");
    }

    std::vector<std::uint32_t> domain_ids(seq.ids.size());
    for (std::size_t i = 0; i < seq.ids.size(); ++i) {
        const std::uint32_t id = seq.ids[i];
        if (id >= vocab_size) {
            throw Error("bad-token-id", "token id " + std::to_string(id) +
                                            " out of range for vocabulary of " +
                                            std::to_string(vocab_size));
        }
        domain_ids[i] = (domain == Domain::Cluster) ? clusters->cluster(id) : id;
    }
    const std::uint32_t domain_size =
        (domain == Domain::Cluster) ? clusters->cluster_count : vocab_size;

    PartitionCache cache(domain_size, params.gamma);
    DetectionResult result;
    for (std::size_t t = h; t < domain_ids.size(); ++t) {
        const std::uint64_t seed = seed_from_context(
            params, std::span<const std::uint32_t>(domain_ids.data(), t));
        const GreenMask& mask = cache.get(seed);
        if (mask.is_green(domain_ids[t])) ++result.green_hits;
        ++result.scored_tokens;
    }
    result.z = z_statistic(result.green_hits, result.scored_tokens, params.gamma);
    return result;
}

}  // namespace xlwm
