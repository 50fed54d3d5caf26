#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "xlwm/clusters.hpp"
#include "xlwm/translator.hpp"
#include "xlwm/vocab.hpp"
#include "xlwm/watermark.hpp"

namespace xlwm {

// Everything a text-level watermark detector needs: the tokenizer vocabulary,
// the watermark parameters, and the partition domain.
struct DetectorConfig {
    const Vocabulary* vocab = nullptr;
    WatermarkParams params;
    Domain domain = Domain::Token;
    const ClusterMap* clusters = nullptr;

    DetectionResult score_text(const std::string& text, const std::string& language) const;
};

// Per-language z-score calibration: mean detector score of human (non-
// watermarked) text translated into each language. Subtracting the mean
// cancels language-specific token-frequency bias, such as a very frequent
// fragment token landing on the green list.
struct LanguageProfile {
    std::map<std::string, double> means;  // language tag -> mu_L
    std::size_t calibration_size = 0;     // texts per language
    std::string fingerprint;              // hex digest of calibration inputs

    bool has(const std::string& language) const { return means.count(language) > 0; }
    double mean(const std::string& language) const { return means.at(language); }

    nlohmann::json to_json() const;
    static LanguageProfile from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static LanguageProfile load(const std::string& path);
};

// Translates the first n human texts into every pool language (the corpus
// language scores as-is), scores them, and records each language's mean z.
// Any translator or scoring failure aborts; partial profiles are never
// produced.
LanguageProfile calibrate(const DetectorConfig& detector, Translator& translator,
                          const std::vector<std::string>& human_corpus,
                          const std::string& corpus_language,
                          const std::vector<std::string>& pool, std::size_t n);

struct SteamCandidate {
    std::string language;
    double raw_z = 0.0;
    double normalized_z = 0.0;  // raw_z - mu_language
    bool failed = false;
    std::string failure;  // error code when failed
};

struct SteamVerdict {
    std::vector<SteamCandidate> candidates;  // suspect first, then pool order
    std::string best_language;
    double best_score = 0.0;  // max normalized z over non-failed candidates
};

// Back-translates the suspect into every pool language, scores every
// candidate (the suspect included), normalizes by each candidate language's
// calibration mean and takes the maximum. Failed candidate translations are
// excluded from the maximum and surfaced on the verdict. Ties prefer the
// suspect's own language, then the lexicographically smallest tag.
SteamVerdict steam_score(const DetectorConfig& detector, Translator& translator,
                         const LanguageProfile& profile, const std::string& suspect,
                         const std::string& suspect_language,
                         const std::vector<std::string>& pool);

// true iff the verdict's best score exceeds the threshold.
bool steam_classify(const SteamVerdict& verdict, double threshold);

}  // namespace xlwm
