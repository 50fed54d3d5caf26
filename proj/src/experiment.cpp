#include "xlwm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "xlwm/error.hpp"
#include "xlwm/metrics.hpp"
#include "xlwm/ngram.hpp"
#include "xlwm/rng.hpp"

namespace xlwm {

namespace fs = std::filesystem;

std::vector<std::string> synthetic_lexicon(std::size_t count, std::uint64_t seed) {
    static const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m",
                                   "n", "p", "r", "s", "t", "v", "z"};
    static const char* vowels[] = {"a", "e", "i", "o", "u"};

    SplitMix64 rng(seed);
    std::set<std::string> seen;
    std::vector<std::string> words;
    while (words.size() < count) {
        const std::size_t syllables = 2 + rng.next_below(2);
        std::string word;
        for (std::size_t s = 0; s < syllables; ++s) {
            word += onsets[rng.next_below(std::size(onsets))];
            word += vowels[rng.next_below(std::size(vowels))];
        }
        if (seen.insert(word).second) words.push_back(word);
    }
    return words;
}

std::vector<std::string> synthetic_corpus(const std::vector<std::string>& lexicon,
                                          std::size_t sentences, std::size_t min_words,
                                          std::size_t max_words, std::uint64_t seed) {
    if (lexicon.empty()) throw Error("bad-lexicon", "lexicon must be non-empty");
    if (min_words < 1 || max_words < min_words) {
        throw Error("bad-params", "need 1 <= min_words <= max_words");
    }
    SplitMix64 rng(seed);
    std::vector<std::string> corpus;
    corpus.reserve(sentences);
    for (std::size_t s = 0; s < sentences; ++s) {
        const std::size_t len = min_words + rng.next_below(max_words - min_words + 1);
        std::string sentence;
        for (std::size_t w = 0; w < len; ++w) {
            if (w > 0) sentence += ' ';
            sentence += lexicon[rng.next_below(lexicon.size())];
        }
        corpus.push_back(std::move(sentence));
    }
    return corpus;
}

std::string method_name(Method method) {
    switch (method) {
        case Method::Kgw:
            return "kgw";
        case Method::Xkgw:
            return "xkgw";
        case Method::Steam:
            return "steam";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "kgw") return Method::Kgw;
    if (name == "xkgw") return Method::Xkgw;
    if (name == "steam") return Method::Steam;
    throw Error("invalid-config", "unknown method '" + name + "'");
}

std::string AttackEntry::label() const {
    if (kind == "none") return "none";
    if (kind == "pivot") return "pivot:" + target + "+" + pivot;
    return kind + ":" + target;
}

std::string AttackEntry::suspect_language(const std::string& source_language) const {
    if (kind == "none" || kind == "cwra") return source_language;
    if (kind == "pivot") return pivot;
    return target;
}

ClassStats class_stats(const std::vector<double>& scores) {
    ClassStats stats;
    stats.count = scores.size();
    if (scores.empty()) return stats;
    double sum = 0.0;
    stats.min = scores.front();
    stats.max = scores.front();
    for (double s : scores) {
        sum += s;
        stats.min = std::min(stats.min, s);
        stats.max = std::max(stats.max, s);
    }
    stats.mean = sum / static_cast<double>(scores.size());
    double var = 0.0;
    for (double s : scores) var += (s - stats.mean) * (s - stats.mean);
    stats.stdev = std::sqrt(var / static_cast<double>(scores.size()));
    return stats;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json languages_json = nlohmann::json::array();
    for (const LanguageSpec& lang : languages) {
        languages_json.push_back({{"tag", lang.tag}, {"tier", lang.tier}});
    }
    nlohmann::json methods_json = nlohmann::json::array();
    for (Method m : methods) methods_json.push_back(method_name(m));
    nlohmann::json attacks_json = nlohmann::json::array();
    for (const AttackEntry& a : attacks) {
        nlohmann::json aj = {{"kind", a.kind}};
        if (!a.target.empty()) aj["target"] = a.target;
        if (!a.pivot.empty()) aj["pivot"] = a.pivot;
        attacks_json.push_back(aj);
    }

    nlohmann::json j = {
        {"seed", seed},
        {"out_dir", out_dir},
        {"source_language", source_language},
        {"lexicon", lexicon_path.empty()
                        ? nlohmann::json({{"words", lexicon_words}, {"seed", lexicon_seed}})
                        : nlohmann::json({{"path", lexicon_path}})},
        {"corpus", corpus_path.empty()
                       ? nlohmann::json({{"sentences", corpus_sentences},
                                         {"min_words", sentence_min_words},
                                         {"max_words", sentence_max_words},
                                         {"seed", corpus_seed}})
                       : nlohmann::json({{"path", corpus_path}})},
        {"languages", languages_json},
        {"tier_coverage", tier_coverage},
        {"language_seed", language_seed},
        {"methods", methods_json},
        {"watermark", watermark.to_json()},
        {"attacks", attacks_json},
        {"attack_noise",
         {{"drop_prob", attack_noise.drop_prob},
          {"swap_prob", attack_noise.swap_prob},
          {"seed", attack_noise.seed}}},
        {"vocab", {{"min_word_freq", vocab_min_word_freq}, {"max_words", vocab_max_words}}},
        {"lm_order", lm_order},
        {"generation",
         {{"texts_per_class", texts_per_class},
          {"tokens", generation_tokens},
          {"prompt_tokens", prompt_tokens},
          {"temperature", temperature},
          {"seed", generation_seed}}},
        {"steam",
         {{"pool", steam_pool},
          {"exclude_target_from_pool", exclude_target_from_pool},
          {"calibration_texts", calibration_texts},
          {"calibration_seed", calibration_seed}}},
        {"tpr_fpr", tpr_fpr},
    };
    if (defence_noise) {
        j["defence_noise"] = {{"drop_prob", defence_noise->drop_prob},
                              {"swap_prob", defence_noise->swap_prob},
                              {"seed", defence_noise->seed}};
    }
    return j;
}

namespace {

NoiseModel noise_from_json(const nlohmann::json& j) {
    NoiseModel noise;
    noise.drop_prob = j.value("drop_prob", 0.0);
    noise.swap_prob = j.value("swap_prob", 0.0);
    noise.seed = j.value("seed", 0ULL);
    noise.validate();
    return noise;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig config;
    config.seed = j.value("seed", config.seed);
    config.out_dir = j.value("out_dir", config.out_dir);
    config.source_language = j.value("source_language", config.source_language);

    if (j.contains("lexicon")) {
        const auto& lex = j.at("lexicon");
        if (lex.contains("path")) {
            config.lexicon_path = lex.at("path").get<std::string>();
        } else {
            config.lexicon_words = lex.value("words", config.lexicon_words);
            config.lexicon_seed = lex.value("seed", config.lexicon_seed);
        }
    }
    if (j.contains("corpus")) {
        const auto& cor = j.at("corpus");
        if (cor.contains("path")) {
            config.corpus_path = cor.at("path").get<std::string>();
        } else {
            config.corpus_sentences = cor.value("sentences", config.corpus_sentences);
            config.sentence_min_words = cor.value("min_words", config.sentence_min_words);
            config.sentence_max_words = cor.value("max_words", config.sentence_max_words);
            config.corpus_seed = cor.value("seed", config.corpus_seed);
        }
    }
    for (const auto& lang : j.value("languages", nlohmann::json::array())) {
        config.languages.push_back(
            {lang.at("tag").get<std::string>(), lang.at("tier").get<std::string>()});
    }
    if (j.contains("tier_coverage")) {
        config.tier_coverage.clear();
        for (const auto& [tier, coverage] : j.at("tier_coverage").items()) {
            config.tier_coverage[tier] = coverage.get<double>();
        }
    }
    config.language_seed = j.value("language_seed", config.language_seed);

    for (const auto& m : j.at("methods")) {
        config.methods.push_back(method_from_name(m.get<std::string>()));
    }
    if (j.contains("watermark")) {
        config.watermark = WatermarkParams::from_json(j.at("watermark"));
    }
    for (const auto& a : j.value("attacks", nlohmann::json::array())) {
        AttackEntry entry;
        entry.kind = a.at("kind").get<std::string>();
        entry.target = a.value("target", std::string());
        entry.pivot = a.value("pivot", std::string());
        config.attacks.push_back(std::move(entry));
    }
    if (config.attacks.empty()) config.attacks.push_back({"none", "", ""});
    if (j.contains("attack_noise")) config.attack_noise = noise_from_json(j.at("attack_noise"));
    if (j.contains("defence_noise")) config.defence_noise = noise_from_json(j.at("defence_noise"));

    if (j.contains("vocab")) {
        config.vocab_min_word_freq =
            j.at("vocab").value("min_word_freq", config.vocab_min_word_freq);
        config.vocab_max_words = j.at("vocab").value("max_words", config.vocab_max_words);
    }
    config.lm_order = j.value("lm_order", config.lm_order);

    if (j.contains("generation")) {
        const auto& gen = j.at("generation");
        config.texts_per_class = gen.value("texts_per_class", config.texts_per_class);
        config.generation_tokens = gen.value("tokens", config.generation_tokens);
        config.prompt_tokens = gen.value("prompt_tokens", config.prompt_tokens);
        config.temperature = gen.value("temperature", config.temperature);
        config.generation_seed = gen.value("seed", config.generation_seed);
    }
    if (j.contains("steam")) {
        const auto& st = j.at("steam");
        config.steam_pool = st.value("pool", config.steam_pool);
        config.exclude_target_from_pool =
            st.value("exclude_target_from_pool", config.exclude_target_from_pool);
        config.calibration_texts = st.value("calibration_texts", config.calibration_texts);
        config.calibration_seed = st.value("calibration_seed", config.calibration_seed);
    }
    config.tpr_fpr = j.value("tpr_fpr", config.tpr_fpr);

    config.validate();
    return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("invalid-config", "cannot read " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::parse_error& e) {
        // Convert the byte offset to a line number for the message.
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min(content.size(), e.byte); ++i) {
            if (content[i] == '\n') ++line;
        }
        throw Error("invalid-config",
                    path + ":" + std::to_string(line) + ": " + e.what());
    }
    try {
        return from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid-config", path + ": " + e.what());
    }
}

void ExperimentConfig::validate() const {
    if (methods.empty()) throw Error("invalid-config", "methods must be non-empty");
    watermark.validate();
    attack_noise.validate();
    if (defence_noise) defence_noise->validate();
    if (!(tpr_fpr >= 0.0 && tpr_fpr < 1.0)) {
        throw Error("invalid-config", "tpr_fpr must be in [0,1)");
    }
    if (texts_per_class < 2) {
        throw Error("invalid-config", "texts_per_class must be >= 2");
    }
    if (prompt_tokens < std::max<std::size_t>(lm_order - 1, watermark.context_width)) {
        throw Error("invalid-config",
                    "prompt_tokens must cover both the LM order and the context width");
    }

    std::set<std::string> tags;
    for (const LanguageSpec& lang : languages) {
        if (lang.tag == source_language) {
            throw Error("invalid-config", "languages must not include the source language");
        }
        if (!tags.insert(lang.tag).second) {
            throw Error("invalid-config", "duplicate language tag " + lang.tag);
        }
        if (!tier_coverage.count(lang.tier)) {
            throw Error("invalid-config",
                        "language " + lang.tag + " has tier '" + lang.tier +
                            "' missing from tier_coverage");
        }
    }
    for (const AttackEntry& attack : attacks) {
        if (attack.kind == "none") continue;
        if (attack.kind != "direct" && attack.kind != "pivot" && attack.kind != "cwra") {
            throw Error("invalid-config", "unknown attack kind '" + attack.kind + "'");
        }
        if (!tags.count(attack.target)) {
            throw Error("invalid-config",
                        "attack target '" + attack.target + "' is not a configured language");
        }
        if (attack.kind == "pivot" && !tags.count(attack.pivot) &&
            attack.pivot != source_language) {
            throw Error("invalid-config",
                        "attack pivot '" + attack.pivot + "' is not a configured language");
        }
    }
    for (const std::string& tag : steam_pool) {
        if (tag != source_language && !tags.count(tag)) {
            throw Error("invalid-config",
                        "steam pool language '" + tag + "' is not configured");
        }
    }
    if (!lexicon_path.empty() && !fs::exists(lexicon_path)) {
        throw Error("invalid-config", "lexicon file does not exist: " + lexicon_path);
    }
    if (!corpus_path.empty() && !fs::exists(corpus_path)) {
        throw Error("invalid-config", "corpus file does not exist: " + corpus_path);
    }
    if (calibration_texts < 1) {
        throw Error("invalid-config", "calibration_texts must be >= 1");
    }
}

std::string ExperimentConfig::config_hash() const {
    // The output directory does not influence any result; leaving it out of
    // the canonical bytes keeps runs into different directories comparable.
    nlohmann::json canonical = to_json();
    canonical.erase("out_dir");
    const std::uint64_t digest = fold64(0xC0FFEE5EEDULL, canonical.dump());
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(digest));
    return hex;
}

nlohmann::json Report::to_json() const {
    nlohmann::json results_json = nlohmann::json::array();
    for (const ConditionResult& r : results) {
        nlohmann::json row = {{"method", method_name(r.method)},
                              {"language", r.language},
                              {"attack", r.attack},
                              {"status", r.failed ? "failed" : "ok"}};
        if (r.failed) {
            row["error"] = r.error;
        } else {
            row["auc"] = r.auc;
            row["tpr_at_fpr"] = r.tpr;
            row["positives"] = {{"count", r.positives.count},
                                {"mean", r.positives.mean},
                                {"stdev", r.positives.stdev},
                                {"min", r.positives.min},
                                {"max", r.positives.max},
                                {"scores", r.positive_scores}};
            row["negatives"] = {{"count", r.negatives.count},
                                {"mean", r.negatives.mean},
                                {"stdev", r.negatives.stdev},
                                {"min", r.negatives.min},
                                {"max", r.negatives.max},
                                {"scores", r.negative_scores}};
        }
        results_json.push_back(std::move(row));
    }
    return {{"metadata",
             {{"config_hash", config_hash}, {"seed", seed}, {"version", version}}},
            {"results", results_json}};
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::string sanitize(std::string name) {
    for (char& c : name) {
        if (c == ':' || c == '+' || c == '/' || c == ' ') c = '-';
    }
    return name;
}

std::string format_score(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::uint64_t text_seed(std::uint64_t base, char class_tag, std::size_t index) {
    return mix64(mix64(base ^ static_cast<std::uint64_t>(class_tag)) ^
                 static_cast<std::uint64_t>(index));
}

// Shared state for one experiment run.
struct Pipeline {
    const ExperimentConfig& config;
    std::vector<std::string> lexicon;
    std::vector<std::string> corpus;
    Vocabulary vocab;
    NGramModel model;
    ClusterMap clusters;
    bool have_clusters = false;
    std::unique_ptr<CipherTranslator> attack_translator;
    std::unique_ptr<CipherTranslator> defence_translator;
    std::unique_ptr<CipherTranslator> exact_translator;  // noiseless, harness internals
    std::vector<TokenSequence> prompts;                  // one per text index
    std::vector<std::string> token_positives;            // detokenized
    std::vector<std::string> cluster_positives;
    std::vector<std::string> negatives;
    LanguageProfile profile;
    bool have_profile = false;
    std::vector<std::string> full_pool;

    explicit Pipeline(const ExperimentConfig& cfg) : config(cfg) {}
};

BilingualDictionary derive_language_dict(const ExperimentConfig& config,
                                         const std::vector<std::string>& lexicon,
                                         const std::string& tag) {
    return derive_cipher_language(lexicon, config.source_language, tag,
                                  mix64(config.language_seed ^ fold64(0, tag)));
}

std::vector<BilingualDictionary> all_pair_dictionaries(
    const ExperimentConfig& config, const std::vector<std::string>& lexicon) {
    // One bijective source->L dictionary per language. For every requested
    // direction (A,B) the word map is the union of every language's route into
    // B: a real translator maps every word it recognizes into the target
    // language, not only words of the nominal source. Word forms are disjoint
    // across languages, so the union is a function.
    std::vector<BilingualDictionary> base;
    for (const LanguageSpec& lang : config.languages) {
        base.push_back(derive_language_dict(config, lexicon, lang.tag));
    }

    std::vector<std::string> tags{config.source_language};
    for (const LanguageSpec& lang : config.languages) tags.push_back(lang.tag);

    std::vector<BilingualDictionary> dicts;
    for (const std::string& target : tags) {
        std::vector<std::pair<std::string, std::string>> to_target;
        if (target == config.source_language) {
            for (const BilingualDictionary& dict : base) {
                for (const auto& [src, tgt] : dict.pairs) to_target.emplace_back(tgt, src);
            }
        } else {
            const BilingualDictionary* target_base = nullptr;
            for (const BilingualDictionary& dict : base) {
                if (dict.target_language == target) target_base = &dict;
            }
            to_target = target_base->pairs;
            for (const BilingualDictionary& dict : base) {
                if (dict.target_language == target) continue;
                const BilingualDictionary hop =
                    compose_dictionaries(invert_dictionary(dict), *target_base);
                to_target.insert(to_target.end(), hop.pairs.begin(), hop.pairs.end());
            }
        }
        for (const std::string& source : tags) {
            if (source == target) continue;
            dicts.push_back(BilingualDictionary::from_pairs(source, target, to_target));
        }
    }
    return dicts;
}

void build_inputs(Pipeline& p) {
    const ExperimentConfig& config = p.config;

    p.lexicon = config.lexicon_path.empty()
                    ? synthetic_lexicon(config.lexicon_words, config.lexicon_seed)
                    : read_lines(config.lexicon_path);
    p.corpus = config.corpus_path.empty()
                   ? synthetic_corpus(p.lexicon, config.corpus_sentences,
                                      config.sentence_min_words, config.sentence_max_words,
                                      config.corpus_seed)
                   : read_lines(config.corpus_path);
    if (p.corpus.empty()) throw Error("empty-corpus", "experiment corpus is empty");

    const std::vector<BilingualDictionary> dicts = all_pair_dictionaries(config, p.lexicon);
    p.attack_translator = std::make_unique<CipherTranslator>(dicts, config.attack_noise);
    p.defence_translator = std::make_unique<CipherTranslator>(
        dicts, config.defence_noise.value_or(config.attack_noise));
    p.exact_translator = std::make_unique<CipherTranslator>(dicts, NoiseModel{});

    // The tokenizer vocabulary covers the source corpus and its translation
    // into every configured language, so full-word tokens exist everywhere.
    std::vector<std::string> vocab_corpus = p.corpus;
    for (const LanguageSpec& lang : config.languages) {
        for (const std::string& doc : p.corpus) {
            vocab_corpus.push_back(
                p.exact_translator->translate(doc, config.source_language, lang.tag));
        }
    }
    p.vocab = Vocabulary::build(vocab_corpus, config.vocab_min_word_freq,
                                config.vocab_max_words);
    p.model = NGramModel::train(vocab_corpus, p.vocab, config.lm_order);
}

void build_clusters(Pipeline& p) {
    if (p.have_clusters) return;
    const ExperimentConfig& config = p.config;

    // Per-tier dictionary coverage: the cluster builder only sees the first
    // floor(coverage * lexicon) pairs of each language's dictionary. This is
    // the resource gradient: low-coverage languages contribute few edges.
    std::vector<BilingualDictionary> cluster_dicts;
    for (const LanguageSpec& lang : config.languages) {
        BilingualDictionary dict = derive_language_dict(config, p.lexicon, lang.tag);
        const double coverage = config.tier_coverage.at(lang.tier);
        const auto keep = static_cast<std::size_t>(
            std::floor(coverage * static_cast<double>(dict.pairs.size())));
        dict.pairs.resize(std::min(dict.pairs.size(), keep));
        if (!dict.pairs.empty()) cluster_dicts.push_back(std::move(dict));
    }
    const SemanticGraph graph = build_graph(p.vocab, cluster_dicts);
    const LouvainResult communities = louvain(graph);
    p.clusters = complete_cluster_map(p.vocab, communities.communities);
    p.have_clusters = true;
}

TokenSequence prompt_for(Pipeline& p, std::size_t index) {
    const ExperimentConfig& config = p.config;
    for (std::size_t probe = 0; probe < p.corpus.size(); ++probe) {
        const std::string& sentence = p.corpus[(index + probe) % p.corpus.size()];
        TokenSequence seq = tokenize(p.vocab, sentence, config.source_language);
        if (seq.ids.size() >= config.prompt_tokens) {
            seq.ids.resize(config.prompt_tokens);
            return seq;
        }
    }
    throw Error("bad-corpus", "no corpus sentence has enough prompt tokens");
}

void build_texts(Pipeline& p, bool need_token_domain, bool need_cluster_domain) {
    const ExperimentConfig& config = p.config;
    if (p.prompts.empty()) {
        for (std::size_t i = 0; i < config.texts_per_class; ++i) {
            p.prompts.push_back(prompt_for(p, i));
        }
    }

    GenerationConfig base;
    base.max_tokens = config.generation_tokens;
    base.temperature = config.temperature;

    if (p.negatives.empty()) {
        for (std::size_t i = 0; i < config.texts_per_class; ++i) {
            GenerationConfig gen = base;
            gen.sample_seed = text_seed(config.generation_seed, 'n', i);
            p.negatives.push_back(detokenize(p.vocab, generate(p.model, p.prompts[i], gen)));
        }
    }
    if (need_token_domain && p.token_positives.empty()) {
        for (std::size_t i = 0; i < config.texts_per_class; ++i) {
            GenerationConfig gen = base;
            gen.sample_seed = text_seed(config.generation_seed, 'p', i);
            gen.watermark = config.watermark;
            gen.domain = Domain::Token;
            p.token_positives.push_back(
                detokenize(p.vocab, generate(p.model, p.prompts[i], gen)));
        }
    }
    if (need_cluster_domain && p.cluster_positives.empty()) {
        build_clusters(p);
        for (std::size_t i = 0; i < config.texts_per_class; ++i) {
            GenerationConfig gen = base;
            gen.sample_seed = text_seed(config.generation_seed, 'x', i);
            gen.watermark = config.watermark;
            gen.domain = Domain::Cluster;
            gen.clusters = &p.clusters;
            p.cluster_positives.push_back(
                detokenize(p.vocab, generate(p.model, p.prompts[i], gen)));
        }
    }
}

std::vector<std::string> default_pool(const ExperimentConfig& config) {
    std::vector<std::string> pool{config.source_language};
    for (const LanguageSpec& lang : config.languages) pool.push_back(lang.tag);
    return pool;
}

void build_profile(Pipeline& p) {
    if (p.have_profile) return;
    const ExperimentConfig& config = p.config;

    p.full_pool = config.steam_pool.empty() ? default_pool(config) : config.steam_pool;

    // Calibrate over the pool plus every language a suspect text can be in.
    std::vector<std::string> calibration_pool = p.full_pool;
    std::set<std::string> seen(calibration_pool.begin(), calibration_pool.end());
    for (const AttackEntry& attack : config.attacks) {
        const std::string lang = attack.suspect_language(config.source_language);
        if (seen.insert(lang).second) calibration_pool.push_back(lang);
    }

    std::vector<std::string> calibration_texts;
    GenerationConfig gen;
    gen.max_tokens = config.generation_tokens;
    gen.temperature = config.temperature;
    for (std::size_t i = 0; i < config.calibration_texts; ++i) {
        gen.sample_seed = text_seed(config.calibration_seed, 'c', i);
        const TokenSequence prompt = prompt_for(p, config.texts_per_class + i);
        calibration_texts.push_back(detokenize(p.vocab, generate(p.model, prompt, gen)));
    }

    DetectorConfig detector{&p.vocab, config.watermark, Domain::Token, nullptr};
    p.profile = calibrate(detector, *p.defence_translator, calibration_texts,
                          config.source_language, calibration_pool,
                          config.calibration_texts);
    p.have_profile = true;
}

ConditionResult run_condition(Pipeline& p, Method method, const AttackEntry& attack) {
    const ExperimentConfig& config = p.config;

    ConditionResult result;
    result.method = method;
    result.language = attack.kind == "none" ? config.source_language : attack.target;
    result.attack = attack.label();

    const std::string suspect_language = attack.suspect_language(config.source_language);

    // Texts for this condition. CWRA generates in the target language from
    // translated prompts; everything else reuses the shared source-language
    // generations.
    std::vector<std::string> positives;
    std::vector<std::string> negatives;
    if (attack.kind == "cwra") {
        if (method == Method::Xkgw) build_clusters(p);
        GenerationConfig base;
        base.max_tokens = config.generation_tokens;
        base.temperature = config.temperature;
        for (std::size_t i = 0; i < config.texts_per_class; ++i) {
            const TokenSequence prompt_src = prompt_for(p, i);
            const std::string prompt_text = p.exact_translator->translate(
                detokenize(p.vocab, prompt_src), config.source_language, attack.target);
            TokenSequence prompt = tokenize(p.vocab, prompt_text, attack.target);

            GenerationConfig pos = base;
            pos.sample_seed = text_seed(config.generation_seed, 'p', i);
            pos.watermark = config.watermark;
            pos.domain = (method == Method::Xkgw) ? Domain::Cluster : Domain::Token;
            if (pos.domain == Domain::Cluster) pos.clusters = &p.clusters;
            positives.push_back(detokenize(p.vocab, generate(p.model, prompt, pos)));

            GenerationConfig neg = base;
            neg.sample_seed = text_seed(config.generation_seed, 'n', i);
            negatives.push_back(detokenize(p.vocab, generate(p.model, prompt, neg)));
        }
    } else {
        build_texts(p, method != Method::Xkgw, method == Method::Xkgw);
        positives = (method == Method::Xkgw) ? p.cluster_positives : p.token_positives;
        negatives = p.negatives;
    }

    // Attack both classes.
    if (attack.kind != "none") {
        AttackSpec spec;
        spec.kind = attack.kind == "direct"  ? AttackSpec::Kind::Direct
                    : attack.kind == "pivot" ? AttackSpec::Kind::Pivot
                                             : AttackSpec::Kind::Cwra;
        spec.source_language = config.source_language;
        spec.target_language = attack.target;
        spec.pivot_language = attack.pivot;
        for (std::string& text : positives) text = apply_attack(*p.attack_translator, spec, text);
        for (std::string& text : negatives) text = apply_attack(*p.attack_translator, spec, text);
    }

    // Detect.
    DetectorConfig token_detector{&p.vocab, config.watermark, Domain::Token, nullptr};
    if (method == Method::Xkgw) build_clusters(p);
    DetectorConfig cluster_detector{&p.vocab, config.watermark, Domain::Cluster,
                                    p.have_clusters ? &p.clusters : nullptr};

    std::vector<std::string> pool;
    if (method == Method::Steam) {
        build_profile(p);
        pool = p.full_pool;
        if (config.exclude_target_from_pool && attack.kind != "none") {
            std::erase(pool, attack.target);
        }
    }

    auto score_one = [&](const std::string& text) -> double {
        switch (method) {
            case Method::Kgw:
                return token_detector.score_text(text, suspect_language).z;
            case Method::Xkgw:
                return cluster_detector.score_text(text, suspect_language).z;
            case Method::Steam:
                return steam_score(token_detector, *p.defence_translator, p.profile, text,
                                   suspect_language, pool)
                    .best_score;
        }
        throw Error("bad-params", "unreachable");
    };

    for (const std::string& text : positives) result.positive_scores.push_back(score_one(text));
    for (const std::string& text : negatives) result.negative_scores.push_back(score_one(text));

    const ScoreSet scores{result.positive_scores, result.negative_scores};
    result.auc = auc(scores);
    result.tpr = tpr_at_fpr(scores, config.tpr_fpr);
    result.positives = class_stats(result.positive_scores);
    result.negatives = class_stats(result.negative_scores);
    return result;
}

void write_outputs(const ExperimentConfig& config, const Report& report) {
    fs::create_directories(config.out_dir);
    fs::create_directories(fs::path(config.out_dir) / "roc");

    {
        std::ofstream out(fs::path(config.out_dir) / "report.json");
        if (!out) throw Error("io-error", "cannot write report.json");
        out << report.to_json().dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(config.out_dir) / "scores.csv");
        if (!out) throw Error("io-error", "cannot write scores.csv");
        out << "method,language,attack,label,score\n";
        for (const ConditionResult& r : report.results) {
            if (r.failed) continue;
            for (double s : r.positive_scores) {
                out << method_name(r.method) << ',' << r.language << ',' << r.attack
                    << ",1," << format_score(s) << "\n";
            }
            for (double s : r.negative_scores) {
                out << method_name(r.method) << ',' << r.language << ',' << r.attack
                    << ",0," << format_score(s) << "\n";
            }
        }
    }
    for (const ConditionResult& r : report.results) {
        if (r.failed) continue;
        const std::string name = sanitize(method_name(r.method) + "_" + r.language + "_" +
                                          r.attack) +
                                 ".csv";
        std::ofstream out(fs::path(config.out_dir) / "roc" / name);
        if (!out) throw Error("io-error", "cannot write roc/" + name);
        out << "fpr,tpr\n";
        for (const auto& [fpr, tpr] :
             roc_points({r.positive_scores, r.negative_scores})) {
            out << format_score(fpr) << ',' << format_score(tpr) << "\n";
        }
    }
}

}  // namespace

Report run_experiment(const ExperimentConfig& config) {
    config.validate();

    Pipeline pipeline(config);
    build_inputs(pipeline);

    Report report;
    report.config_hash = config.config_hash();
    report.seed = config.seed;
    report.version = kVersion;

    for (Method method : config.methods) {
        for (const AttackEntry& attack : config.attacks) {
            try {
                report.results.push_back(run_condition(pipeline, method, attack));
            } catch (const Error& e) {
                ConditionResult failed;
                failed.method = method;
                failed.language =
                    attack.kind == "none" ? config.source_language : attack.target;
                failed.attack = attack.label();
                failed.failed = true;
                failed.error = e.what();
                report.results.push_back(std::move(failed));
            }
        }
    }

    write_outputs(config, report);
    return report;
}

std::string render_report(const nlohmann::json& report) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-8s %-10s %-18s %8s %8s\n", "method", "language",
                  "attack", "AUC", "TPR@FPR");
    out << line;
    out << std::string(56, '-') << "\n";
    for (const auto& row : report.at("results")) {
        const std::string method = row.at("method").get<std::string>();
        const std::string language = row.at("language").get<std::string>();
        const std::string attack = row.at("attack").get<std::string>();
        if (row.at("status").get<std::string>() == "failed") {
            std::snprintf(line, sizeof(line), "%-8s %-10s %-18s %17s\n", method.c_str(),
                          language.c_str(), attack.c_str(), "FAILED");
            out << line;
            continue;
        }
        std::snprintf(line, sizeof(line), "%-8s %-10s %-18s %8.4f %8.4f\n", method.c_str(),
                      language.c_str(), attack.c_str(), row.at("auc").get<double>(),
                      row.at("tpr_at_fpr").get<double>());
        out << line;
    }
    return out.str();
}

}  // namespace xlwm
