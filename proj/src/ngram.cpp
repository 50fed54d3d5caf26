#include "xlwm/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "xlwm/error.hpp"
#include "xlwm/rng.hpp"

namespace xlwm {

NGramModel NGramModel::train(const std::vector<std::string>& corpus,
                             const Vocabulary& vocab, std::uint32_t order) {
    if (order < 1) throw Error("bad-params", "order must be >= 1");

    NGramModel model;
    model.order_ = order;
    model.vocab_size_ = static_cast<std::uint32_t>(vocab.size());

    std::uint64_t total_tokens = 0;
    for (const std::string& doc : corpus) {
        TokenSequence seq = tokenize(vocab, doc);
        total_tokens += seq.ids.size();
        if (seq.ids.size() < order) continue;
        for (std::size_t i = 0; i + order <= seq.ids.size(); ++i) {
            std::vector<std::uint32_t> ctx(seq.ids.begin() + i,
                                           seq.ids.begin() + i + order - 1);
            ContextCounts& cc = model.counts_[ctx];
            ++cc.next[seq.ids[i + order - 1]];
            ++cc.total;
        }
    }
    if (total_tokens < order) {
        throw Error("insufficient-data", "corpus tokenizes to " +
                                             std::to_string(total_tokens) +
                                             " tokens, need " + std::to_string(order));
    }
    return model;
}

std::vector<double> NGramModel::next_token_probs(
    std::span<const std::uint32_t> context) const {
    const std::size_t ctx_len = order_ - 1;
    if (context.size() < ctx_len) {
        throw Error("insufficient-context",
                    "need " + std::to_string(ctx_len) + " context tokens");
    }
    std::vector<std::uint32_t> ctx(context.end() - ctx_len, context.end());

    const double v = static_cast<double>(vocab_size_);
    auto it = counts_.find(ctx);
    if (it == counts_.end()) {
        return std::vector<double>(vocab_size_, 1.0 / v);
    }
    const ContextCounts& cc = it->second;
    const double denom = static_cast<double>(cc.total) + v;
    std::vector<double> probs(vocab_size_, 1.0 / denom);
    for (const auto& [id, count] : cc.next) {
        probs[id] = (static_cast<double>(count) + 1.0) / denom;
    }
    return probs;
}

nlohmann::json NGramModel::to_json() const {
    // Nested maps keyed by decimal id strings: order-1 levels of context keys,
    // then next-id -> count at the leaves.
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [ctx, cc] : counts_) {
        nlohmann::json* node = &counts;
        for (std::uint32_t id : ctx) {
            node = &(*node)[std::to_string(id)];
            if (node->is_null()) *node = nlohmann::json::object();
        }
        for (const auto& [id, count] : cc.next) {
            (*node)[std::to_string(id)] = count;
        }
    }
    return {{"n", order_}, {"vocab_size", vocab_size_}, {"counts", counts}};
}

NGramModel NGramModel::from_json(const nlohmann::json& j) {
    NGramModel model;
    model.order_ = j.at("n").get<std::uint32_t>();
    model.vocab_size_ = j.at("vocab_size").get<std::uint32_t>();

    struct Walker {
        NGramModel& model;
        void walk(const nlohmann::json& node, std::vector<std::uint32_t>& ctx,
                  std::size_t depth) {
            if (depth == model.order_ - 1u) {
                ContextCounts& cc = model.counts_[ctx];
                for (const auto& [key, count] : node.items()) {
                    const auto id = static_cast<std::uint32_t>(std::stoul(key));
                    cc.next[id] = count.get<std::uint64_t>();
                    cc.total += cc.next[id];
                }
                return;
            }
            for (const auto& [key, child] : node.items()) {
                ctx.push_back(static_cast<std::uint32_t>(std::stoul(key)));
                walk(child, ctx, depth + 1);
                ctx.pop_back();
            }
        }
    } walker{model};
    std::vector<std::uint32_t> ctx;
    walker.walk(j.at("counts"), ctx, 0);
    return model;
}

void NGramModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("io-error", "cannot write " + path);
    out << to_json().dump() << "\n";
}

NGramModel NGramModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

void GenerationConfig::validate() const {
    if (max_tokens < 1) throw Error("bad-params", "max_tokens must be >= 1");
    if (!(temperature > 0.0)) throw Error("bad-params", "temperature must be positive");
    if (watermark) watermark->validate();
}

TokenSequence generate(const NGramModel& model, const TokenSequence& prompt,
                       const GenerationConfig& cfg) {
    cfg.validate();
    const std::size_t h = cfg.watermark ? cfg.watermark->context_width : 0;
    const std::size_t min_prompt = std::max<std::size_t>(model.order() - 1, h);
    if (prompt.ids.size() < min_prompt) {
        throw Error("insufficient-context",
                    "prompt of " + std::to_string(prompt.ids.size()) +
                        " tokens needs at least " + std::to_string(min_prompt));
    }
    if (cfg.watermark && cfg.domain == Domain::Cluster && cfg.clusters == nullptr) {
        throw Error("missing-cluster-map", "cluster domain requires a cluster map");
    }

    const std::uint32_t vocab_size = model.vocab_size();
    const std::uint32_t domain_size =
        (cfg.watermark && cfg.domain == Domain::Cluster) ? cfg.clusters->cluster_count
                                                         : vocab_size;

    TokenSequence out;
    out.language = prompt.language;
    out.ids = prompt.ids;

    SplitMix64 sampler(cfg.sample_seed);
    PartitionCache cache(domain_size, cfg.watermark ? cfg.watermark->gamma : 0.5);

    std::vector<std::uint32_t> domain_ctx;
    for (std::size_t step = 0; step < cfg.max_tokens; ++step) {
        std::vector<double> probs = model.next_token_probs(out.ids);
        std::vector<double> logits(probs.size());
        for (std::size_t i = 0; i < probs.size(); ++i) {
            logits[i] = std::log(probs[i]) / cfg.temperature;
        }

        if (cfg.watermark) {
            domain_ctx.resize(h);
            for (std::size_t i = 0; i < h; ++i) {
                const std::uint32_t id = out.ids[out.ids.size() - h + i];
                domain_ctx[i] = (cfg.domain == Domain::Cluster) ? cfg.clusters->cluster(id) : id;
            }
            const std::uint64_t seed = seed_from_context(*cfg.watermark, domain_ctx);
            const GreenMask& mask = cache.get(seed);

            std::vector<std::uint32_t> green_tokens;
            if (cfg.domain == Domain::Token) {
                green_tokens = mask.green_ids;
            } else {
                for (std::uint32_t id = 0; id < vocab_size; ++id) {
                    if (mask.is_green(cfg.clusters->cluster(id))) green_tokens.push_back(id);
                }
            }
            logits = bias_logits(std::move(logits), green_tokens, cfg.watermark->delta);
        }

        // Inverse-CDF sample over softmax(logits).
        double max_logit = logits[0];
        for (double l : logits) max_logit = std::max(max_logit, l);
        double sum = 0.0;
        std::vector<double>& weights = logits;  // reuse storage
        for (double& l : weights) {
            l = std::exp(l - max_logit);
            sum += l;
        }
        const double u = sampler.next_unit() * sum;
        double cum = 0.0;
        std::uint32_t picked = vocab_size - 1;
        for (std::uint32_t i = 0; i < weights.size(); ++i) {
            cum += weights[i];
            if (cum > u) {
                picked = i;
                break;
            }
        }
        out.ids.push_back(picked);
    }
    return out;
}

}  // namespace xlwm
