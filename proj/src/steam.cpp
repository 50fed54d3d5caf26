#include "xlwm/steam.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "xlwm/error.hpp"
#include "xlwm/rng.hpp"

namespace xlwm {

DetectionResult DetectorConfig::score_text(const std::string& text,
                                           const std::string& language) const {
    if (vocab == nullptr) throw Error("bad-params", "detector has no vocabulary");
    const TokenSequence seq = tokenize(*vocab, text, language);
    return score_sequence(seq, params, static_cast<std::uint32_t>(vocab->size()), domain,
                          clusters);
}

nlohmann::json LanguageProfile::to_json() const {
    nlohmann::json means_json = nlohmann::json::object();
    for (const auto& [tag, mu] : means) means_json[tag] = mu;
    return {{"n", calibration_size}, {"means", means_json}, {"fingerprint", fingerprint}};
}

LanguageProfile LanguageProfile::from_json(const nlohmann::json& j) {
    LanguageProfile profile;
    profile.calibration_size = j.at("n").get<std::size_t>();
    profile.fingerprint = j.at("fingerprint").get<std::string>();
    for (const auto& [tag, mu] : j.at("means").items()) {
        profile.means[tag] = mu.get<double>();
    }
    return profile;
}

void LanguageProfile::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("io-error", "cannot write " + path);
    out << to_json().dump(2) << "\n";
}

LanguageProfile LanguageProfile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

LanguageProfile calibrate(const DetectorConfig& detector, Translator& translator,
                          const std::vector<std::string>& human_corpus,
                          const std::string& corpus_language,
                          const std::vector<std::string>& pool, std::size_t n) {
    if (n < 1 || human_corpus.size() < n) {
        throw Error("calibration-failed",
                    "need " + std::to_string(n) + " calibration texts, have " +
                        std::to_string(human_corpus.size()));
    }

    std::vector<std::string> languages;  // pool plus corpus language, deduplicated
    std::set<std::string> seen;
    for (const std::string& tag : pool) {
        if (seen.insert(tag).second) languages.push_back(tag);
    }
    if (seen.insert(corpus_language).second) languages.push_back(corpus_language);

    std::uint64_t digest = 0x57454C434F4D45ULL;
    digest = fold64(digest, corpus_language);
    digest = fold64(digest, detector.params.to_json().dump());
    digest = mix64(digest ^ n);
    for (std::size_t i = 0; i < n; ++i) digest = fold64(digest, human_corpus[i]);

    LanguageProfile profile;
    profile.calibration_size = n;
    for (const std::string& language : languages) {
        digest = fold64(digest, language);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::string candidate;
            try {
                candidate = (language == corpus_language)
                                ? human_corpus[i]
                                : translator.translate(human_corpus[i], corpus_language,
                                                       language);
            } catch (const Error& e) {
                throw Error("calibration-failed",
                            "translating into " + language + ": " + e.what());
            }
            try {
                sum += detector.score_text(candidate, language).z;
            } catch (const Error& e) {
                throw Error("calibration-failed",
                            "scoring " + language + " text " + std::to_string(i) + ": " +
                                e.what());
            }
        }
        profile.means[language] = sum / static_cast<double>(n);
    }

    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(digest));
    profile.fingerprint = hex;
    return profile;
}

SteamVerdict steam_score(const DetectorConfig& detector, Translator& translator,
                         const LanguageProfile& profile, const std::string& suspect,
                         const std::string& suspect_language,
                         const std::vector<std::string>& pool) {
    if (!profile.has(suspect_language)) {
        throw Error("uncalibrated-language", suspect_language + " missing from profile");
    }
    for (const std::string& tag : pool) {
        if (!profile.has(tag)) {
            throw Error("uncalibrated-language", tag + " missing from profile");
        }
    }

    SteamVerdict verdict;

    // The suspect itself; a failure here means no verdict at all.
    {
        SteamCandidate own;
        own.language = suspect_language;
        own.raw_z = detector.score_text(suspect, suspect_language).z;
        own.normalized_z = own.raw_z - profile.mean(suspect_language);
        verdict.candidates.push_back(own);
    }

    std::set<std::string> seen{suspect_language};
    for (const std::string& language : pool) {
        if (!seen.insert(language).second) continue;
        SteamCandidate candidate;
        candidate.language = language;
        try {
            const std::string text =
                translator.translate(suspect, suspect_language, language);
            candidate.raw_z = detector.score_text(text, language).z;
            candidate.normalized_z = candidate.raw_z - profile.mean(language);
        } catch (const Error& e) {
            candidate.failed = true;
            candidate.failure = e.code();
        }
        verdict.candidates.push_back(candidate);
    }

    bool first = true;
    for (const SteamCandidate& candidate : verdict.candidates) {
        if (candidate.failed) continue;
        bool better = false;
        if (first) {
            better = true;
        } else if (candidate.normalized_z > verdict.best_score) {
            better = true;
        } else if (candidate.normalized_z == verdict.best_score) {
            const bool best_is_own = verdict.best_language == suspect_language;
            if (!best_is_own && (candidate.language == suspect_language ||
                                 candidate.language < verdict.best_language)) {
                better = true;
            }
        }
        if (better) {
            verdict.best_score = candidate.normalized_z;
            verdict.best_language = candidate.language;
            first = false;
        }
    }
    return verdict;
}

bool steam_classify(const SteamVerdict& verdict, double threshold) {
    return verdict.best_score > threshold;
}

}  // namespace xlwm
