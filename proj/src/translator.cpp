#include "xlwm/translator.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <semaphore>
#include <set>
#include <thread>

#include "httplib.h"

#include "xlwm/error.hpp"
#include "xlwm/rng.hpp"

namespace xlwm {

void NoiseModel::validate() const {
    if (!(drop_prob >= 0.0 && drop_prob < 1.0)) {
        throw Error("bad-params", "drop_prob must be in [0,1)");
    }
    if (!(swap_prob >= 0.0 && swap_prob < 1.0)) {
        throw Error("bad-params", "swap_prob must be in [0,1)");
    }
}

CipherTranslator::CipherTranslator(std::vector<BilingualDictionary> dictionaries,
                                   NoiseModel noise)
    : noise_(noise) {
    noise_.validate();
    for (BilingualDictionary& dict : dictionaries) {
        PairMaps maps;
        std::set<std::string> targets;
        bool invertible = true;
        std::set<std::string> seen_targets;
        for (auto& [src, tgt] : dict.pairs) {
            maps.word_map.emplace(src, tgt);
            targets.insert(tgt);
            if (!seen_targets.insert(tgt).second) invertible = false;
        }
        maps.targets.assign(targets.begin(), targets.end());

        if (invertible && !maps_.count({dict.target_language, dict.source_language})) {
            PairMaps inverse;
            std::set<std::string> inv_targets;
            for (const auto& [src, tgt] : maps.word_map) {
                inverse.word_map.emplace(tgt, src);
                inv_targets.insert(src);
            }
            inverse.targets.assign(inv_targets.begin(), inv_targets.end());
            maps_.emplace(std::make_pair(dict.target_language, dict.source_language),
                          std::move(inverse));
        }
        maps_[{dict.source_language, dict.target_language}] = std::move(maps);
    }
}

std::string CipherTranslator::translate(const std::string& text, const std::string& src,
                                        const std::string& tgt) {
    auto it = maps_.find({src, tgt});
    if (it == maps_.end()) {
        throw Error("no-dictionary", "no dictionary for " + src + "->" + tgt);
    }
    const PairMaps& maps = it->second;

    std::uint64_t state = noise_.seed;
    state = fold64(state, src);
    state = fold64(state, tgt);
    state = fold64(state, text);
    SplitMix64 rng(state);

    const bool noisy = noise_.drop_prob > 0.0 || noise_.swap_prob > 0.0;

    std::string out;
    for (const std::string& word : split_words(text)) {
        auto mapped = maps.word_map.find(word);
        std::string translated = (mapped != maps.word_map.end()) ? mapped->second : word;

        if (noisy) {
            if (rng.next_unit() < noise_.drop_prob) continue;
            if (rng.next_unit() < noise_.swap_prob) {
                // uniformly random other target word
                const auto& targets = maps.targets;
                auto pos = std::lower_bound(targets.begin(), targets.end(), translated);
                const bool present = pos != targets.end() && *pos == translated;
                const std::size_t candidates = targets.size() - (present ? 1 : 0);
                if (candidates > 0) {
                    std::size_t j = static_cast<std::size_t>(rng.next_below(candidates));
                    if (present && j >= static_cast<std::size_t>(pos - targets.begin())) ++j;
                    translated = targets[j];
                }
            }
        }
        if (!out.empty()) out += ' ';
        out += translated;
    }
    return out;
}

namespace {

struct ParsedEndpoint {
    std::string base;  // scheme://host:port
    std::string path;  // /translate
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw Error("bad-params", "endpoint must look like http://host:port/path");
    }
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {endpoint, "/"};
    }
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace

struct HttpTranslator::Impl {
    HttpTranslatorOptions options;
    ParsedEndpoint endpoint;
    std::string auth_token;
    std::counting_semaphore<64> slots;

    explicit Impl(HttpTranslatorOptions opts)
        : options(std::move(opts)),
          endpoint(parse_endpoint(options.endpoint)),
          slots(std::max(1, std::min(64, options.max_concurrency))) {
        if (const char* token = std::getenv(options.token_env.c_str())) {
            auth_token = token;
        }
    }
};

HttpTranslator::HttpTranslator(HttpTranslatorOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {}

HttpTranslator::~HttpTranslator() = default;

std::string HttpTranslator::translate(const std::string& text, const std::string& src,
                                      const std::string& tgt) {
    const nlohmann::json body = {{"q", text}, {"source", src}, {"target", tgt}};
    const std::string payload = body.dump();

    impl_->slots.acquire();
    struct Release {
        std::counting_semaphore<64>& s;
        ~Release() { s.release(); }
    } release{impl_->slots};

    std::string last_failure = "no attempt made";
    auto backoff = impl_->options.retry.initial_backoff;
    const int attempts = std::max(1, impl_->options.retry.max_attempts);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(static_cast<long long>(
                static_cast<double>(backoff.count()) *
                impl_->options.retry.backoff_multiplier));
        }

        httplib::Client client(impl_->endpoint.base);
        client.set_connection_timeout(impl_->options.timeout);
        client.set_read_timeout(impl_->options.timeout);
        httplib::Headers headers;
        if (!impl_->auth_token.empty()) {
            headers.emplace("Authorization", "Bearer " + impl_->auth_token);
        }

        auto res = client.Post(impl_->endpoint.path, headers, payload, "application/json");
        if (!res) {
            last_failure = "connection failure";
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_failure = "http status " + std::to_string(res->status);
            continue;
        }
        try {
            return nlohmann::json::parse(res->body).at("translatedText").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            last_failure = "malformed response body";
        }
    }
    throw Error("translator-unavailable",
                impl_->options.endpoint + " after " + std::to_string(attempts) +
                    " attempts: " + last_failure);
}

nlohmann::json TranslatorSpec::to_json() const {
    if (kind == Kind::Cipher) {
        nlohmann::json dicts = nlohmann::json::array();
        for (std::size_t i = 0; i < dictionary_paths.size(); ++i) {
            dicts.push_back({{"path", dictionary_paths[i]},
                             {"source", dictionaries.at(i).source_language},
                             {"target", dictionaries.at(i).target_language}});
        }
        return {{"kind", "cipher"},
                {"dictionaries", dicts},
                {"noise",
                 {{"drop_prob", noise.drop_prob},
                  {"swap_prob", noise.swap_prob},
                  {"seed", std::to_string(noise.seed)}}}};
    }
    return {{"kind", "http"},
            {"endpoint", http.endpoint},
            {"token_env", http.token_env},
            {"timeout_ms", http.timeout.count()},
            {"retry",
             {{"max_attempts", http.retry.max_attempts},
              {"initial_backoff_ms", http.retry.initial_backoff.count()},
              {"backoff_multiplier", http.retry.backoff_multiplier}}},
            {"max_concurrency", http.max_concurrency}};
}

TranslatorSpec TranslatorSpec::from_json(const nlohmann::json& j) {
    TranslatorSpec spec;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "cipher") {
        spec.kind = Kind::Cipher;
        for (const auto& d : j.at("dictionaries")) {
            const std::string path = d.at("path").get<std::string>();
            spec.dictionary_paths.push_back(path);
            spec.dictionaries.push_back(BilingualDictionary::load_muse(
                path, d.at("source").get<std::string>(), d.at("target").get<std::string>()));
        }
        if (j.contains("noise")) {
            const auto& n = j.at("noise");
            spec.noise.drop_prob = n.value("drop_prob", 0.0);
            spec.noise.swap_prob = n.value("swap_prob", 0.0);
            if (n.contains("seed")) {
                const auto& s = n.at("seed");
                spec.noise.seed = s.is_string() ? std::stoull(s.get<std::string>())
                                                : s.get<std::uint64_t>();
            }
        }
        spec.noise.validate();
        return spec;
    }
    if (kind == "http") {
        spec.kind = Kind::Http;
        spec.http.endpoint = j.at("endpoint").get<std::string>();
        spec.http.token_env = j.value("token_env", std::string("TRANSLATOR_API_TOKEN"));
        spec.http.timeout = std::chrono::milliseconds(j.value("timeout_ms", 10000));
        if (j.contains("retry")) {
            const auto& r = j.at("retry");
            spec.http.retry.max_attempts = r.value("max_attempts", 3);
            spec.http.retry.initial_backoff =
                std::chrono::milliseconds(r.value("initial_backoff_ms", 100));
            spec.http.retry.backoff_multiplier = r.value("backoff_multiplier", 2.0);
        }
        spec.http.max_concurrency = j.value("max_concurrency", 4);
        return spec;
    }
    throw Error("bad-params", "translator kind must be cipher or http");
}

TranslatorSpec TranslatorSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

std::unique_ptr<Translator> make_translator(const TranslatorSpec& spec) {
    if (spec.kind == TranslatorSpec::Kind::Cipher) {
        return std::make_unique<CipherTranslator>(spec.dictionaries, spec.noise);
    }
    return std::make_unique<HttpTranslator>(spec.http);
}

BilingualDictionary derive_cipher_language(const std::vector<std::string>& lexicon,
                                           const std::string& source_language,
                                           const std::string& language_tag,
                                           std::uint64_t seed) {
    if (lexicon.empty()) throw Error("bad-lexicon", "lexicon must be non-empty");
    std::set<std::string> distinct(lexicon.begin(), lexicon.end());
    if (distinct.size() != lexicon.size()) {
        throw Error("bad-lexicon", "lexicon words must be distinct");
    }

    const std::vector<std::uint32_t> perm = shuffled_identity(seed, lexicon.size());
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(lexicon.size());
    for (std::size_t i = 0; i < lexicon.size(); ++i) {
        pairs.emplace_back(lexicon[i], language_tag + "_" + lexicon[perm[i]]);
    }
    return BilingualDictionary::from_pairs(source_language, language_tag, std::move(pairs));
}

BilingualDictionary invert_dictionary(const BilingualDictionary& dict) {
    std::set<std::string> targets;
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(dict.pairs.size());
    for (const auto& [src, tgt] : dict.pairs) {
        if (!targets.insert(tgt).second) {
            throw Error("bad-dictionary", "dictionary is not invertible");
        }
        pairs.emplace_back(tgt, src);
    }
    return BilingualDictionary::from_pairs(dict.target_language, dict.source_language,
                                           std::move(pairs));
}

BilingualDictionary compose_dictionaries(const BilingualDictionary& ab,
                                         const BilingualDictionary& bc) {
    if (ab.target_language != bc.source_language) {
        throw Error("bad-dictionary", "composition requires matching middle language");
    }
    std::map<std::string, std::string> b_to_c;
    for (const auto& [b, c] : bc.pairs) b_to_c.emplace(b, c);

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& [a, b] : ab.pairs) {
        auto it = b_to_c.find(b);
        if (it != b_to_c.end()) pairs.emplace_back(a, it->second);
    }
    return BilingualDictionary::from_pairs(ab.source_language, bc.target_language,
                                           std::move(pairs));
}

void AttackSpec::validate() const {
    if (source_language.empty() || target_language.empty()) {
        throw Error("bad-attack", "source and target languages are required");
    }
    switch (kind) {
        case Kind::Direct:
            if (source_language == target_language) {
                throw Error("bad-attack", "direct attack needs distinct languages");
            }
            break;
        case Kind::Pivot:
            if (pivot_language.empty()) {
                throw Error("bad-attack", "pivot attack needs a pivot language");
            }
            if (source_language == target_language || target_language == pivot_language) {
                throw Error("bad-attack", "pivot attack needs distinct hop languages");
            }
            break;
        case Kind::Cwra:
            if (source_language == target_language) {
                throw Error("bad-attack", "cwra needs distinct languages");
            }
            break;
    }
}

std::string AttackSpec::label() const {
    switch (kind) {
        case Kind::Direct:
            return "direct:" + target_language;
        case Kind::Pivot:
            return "pivot:" + target_language + "+" + pivot_language;
        case Kind::Cwra:
            return "cwra:" + target_language;
    }
    return "?";
}

nlohmann::json AttackSpec::to_json() const {
    nlohmann::json j = {{"source", source_language}, {"target", target_language}};
    switch (kind) {
        case Kind::Direct:
            j["kind"] = "direct";
            break;
        case Kind::Pivot:
            j["kind"] = "pivot";
            j["pivot"] = pivot_language;
            break;
        case Kind::Cwra:
            j["kind"] = "cwra";
            break;
    }
    return j;
}

AttackSpec AttackSpec::from_json(const nlohmann::json& j) {
    AttackSpec spec;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "direct") {
        spec.kind = Kind::Direct;
    } else if (kind == "pivot") {
        spec.kind = Kind::Pivot;
        spec.pivot_language = j.at("pivot").get<std::string>();
    } else if (kind == "cwra") {
        spec.kind = Kind::Cwra;
    } else {
        throw Error("bad-attack", "attack kind must be direct, pivot or cwra");
    }
    spec.source_language = j.at("source").get<std::string>();
    spec.target_language = j.at("target").get<std::string>();
    spec.validate();
    return spec;
}

std::string apply_attack(Translator& translator, const AttackSpec& attack,
                         const std::string& text) {
    attack.validate();
    switch (attack.kind) {
        case AttackSpec::Kind::Direct:
            return translator.translate(text, attack.source_language, attack.target_language);
        case AttackSpec::Kind::Pivot: {
            const std::string hop =
                translator.translate(text, attack.source_language, attack.target_language);
            return translator.translate(hop, attack.target_language, attack.pivot_language);
        }
        case AttackSpec::Kind::Cwra:
            return translator.translate(text, attack.target_language, attack.source_language);
    }
    throw Error("bad-attack", "unreachable");
}

}  // namespace xlwm
