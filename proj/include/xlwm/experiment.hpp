#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "xlwm/steam.hpp"
#include "xlwm/translator.hpp"
#include "xlwm/watermark.hpp"

namespace xlwm {

// Deterministic pronounceable word list (distinct CV-syllable words).
std::vector<std::string> synthetic_lexicon(std::size_t count, std::uint64_t seed);

// Sentences of uniform random lexicon words, one sentence per document.
std::vector<std::string> synthetic_corpus(const std::vector<std::string>& lexicon,
                                          std::size_t sentences, std::size_t min_words,
                                          std::size_t max_words, std::uint64_t seed);

enum class Method { Kgw, Xkgw, Steam };

std::string method_name(Method method);
Method method_from_name(const std::string& name);

struct LanguageSpec {
    std::string tag;
    std::string tier;  // high | medium | low
};

// One attack entry of the experiment grid. kind "none" scores the un-attacked
// texts in the generation language.
struct AttackEntry {
    std::string kind;  // none | direct | pivot | cwra
    std::string target;
    std::string pivot;

    std::string label() const;
    std::string suspect_language(const std::string& source_language) const;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::string source_language = "en";

    // lexicon: file of one word per line, or synthetic
    std::string lexicon_path;
    std::size_t lexicon_words = 50;
    std::uint64_t lexicon_seed = 7;

    // corpus: file of one document per line, or synthetic sentences
    std::string corpus_path;
    std::size_t corpus_sentences = 3000;
    std::size_t sentence_min_words = 6;
    std::size_t sentence_max_words = 12;
    std::uint64_t corpus_seed = 11;

    std::vector<LanguageSpec> languages;
    std::map<std::string, double> tier_coverage = {
        {"high", 1.0}, {"medium", 0.6}, {"low", 0.25}};
    std::uint64_t language_seed = 99;

    std::vector<Method> methods;
    WatermarkParams watermark;
    std::vector<AttackEntry> attacks;
    NoiseModel attack_noise;
    std::optional<NoiseModel> defence_noise;  // defaults to attack noise

    std::size_t vocab_min_word_freq = 3;
    std::size_t vocab_max_words = 100000;
    std::uint32_t lm_order = 2;

    std::size_t texts_per_class = 200;
    std::size_t generation_tokens = 200;
    std::size_t prompt_tokens = 3;
    double temperature = 0.25;
    std::uint64_t generation_seed = 21;

    std::vector<std::string> steam_pool;  // defaults to source + all languages
    bool exclude_target_from_pool = false;
    std::size_t calibration_texts = 50;
    std::uint64_t calibration_seed = 33;
    double tpr_fpr = 0.01;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    // Parses and validates; error messages carry the line number for parse
    // failures and the JSON path for validation failures.
    static ExperimentConfig load(const std::string& path);

    std::string config_hash() const;  // mix64-folded digest of canonical bytes
    void validate() const;
};

struct ClassStats {
    std::size_t count = 0;
    double mean = 0.0;
    double stdev = 0.0;
    double min = 0.0;
    double max = 0.0;
};

ClassStats class_stats(const std::vector<double>& scores);

struct ConditionResult {
    Method method = Method::Kgw;
    std::string language;
    std::string attack;
    bool failed = false;
    std::string error;
    double auc = 0.0;
    double tpr = 0.0;
    ClassStats positives;
    ClassStats negatives;
    std::vector<double> positive_scores;
    std::vector<double> negative_scores;
};

struct Report {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version;
    std::vector<ConditionResult> results;

    nlohmann::json to_json() const;
};

// Full pipeline: vocabulary, language derivation, LM training, clustering,
// watermarked/unwatermarked generation, attacks, detection per method,
// metrics. Writes report.json, scores.csv and per-condition ROC files under
// config.out_dir. A failing condition is recorded and does not stop the run.
Report run_experiment(const ExperimentConfig& config);

// Fixed-width text table over report.json content.
std::string render_report(const nlohmann::json& report);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace xlwm
