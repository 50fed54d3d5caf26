#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "xlwm/clusters.hpp"
#include "xlwm/vocab.hpp"
#include "xlwm/watermark.hpp"

namespace xlwm {

// Deterministic add-1-smoothed n-gram model over a fixed vocabulary. Stands in
// for a real LLM behind the same contract: a distribution over the vocabulary
// given the preceding context.
class NGramModel {
public:
    NGramModel() = default;

    // Counts n-grams per document (windows never cross document boundaries).
    static NGramModel train(const std::vector<std::string>& corpus,
                            const Vocabulary& vocab, std::uint32_t order);

    std::uint32_t order() const { return order_; }
    std::uint32_t vocab_size() const { return vocab_size_; }

    // P(token | last order-1 ids of context); add-1 smoothing means an unseen
    // context yields the uniform distribution.
    std::vector<double> next_token_probs(std::span<const std::uint32_t> context) const;

    nlohmann::json to_json() const;
    static NGramModel from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static NGramModel load(const std::string& path);

private:
    struct ContextCounts {
        std::map<std::uint32_t, std::uint64_t> next;
        std::uint64_t total = 0;
    };

    std::uint32_t order_ = 0;
    std::uint32_t vocab_size_ = 0;
    std::map<std::vector<std::uint32_t>, ContextCounts> counts_;
};

struct GenerationConfig {
    std::size_t max_tokens = 100;
    std::uint64_t sample_seed = 0;
    double temperature = 1.0;
    std::optional<WatermarkParams> watermark;
    Domain domain = Domain::Token;
    const ClusterMap* clusters = nullptr;  // required for the cluster domain

    void validate() const;
};

// Samples max_tokens continuation tokens. Per step: logits = log P / T; with a
// watermark, the domain is partitioned from the context seed and green domain
// entries lift to green tokens (a token is green when its cluster is green)
// before the delta bias; sampling is inverse-CDF over the softmax, driven by a
// splitmix64 stream seeded with sample_seed. Returns prompt + continuation.
TokenSequence generate(const NGramModel& model, const TokenSequence& prompt,
                       const GenerationConfig& cfg);

}  // namespace xlwm
