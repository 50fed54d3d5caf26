#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "xlwm/vocab.hpp"

namespace xlwm {

class Translator {
public:
    virtual ~Translator() = default;
    virtual std::string translate(const std::string& text, const std::string& src,
                                  const std::string& tgt) = 0;
};

// Per-word noise applied after cipher mapping; each word is independently
// dropped with drop_prob, otherwise swapped for a uniformly random other
// target word with swap_prob. The noise stream is seeded from
// (seed, src, tgt, text), so a given translation is deterministic.
struct NoiseModel {
    double drop_prob = 0.0;
    double swap_prob = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Word-by-word dictionary translator over synthetic cipher languages.
// Out-of-dictionary words pass through verbatim. A (src,tgt) request resolves
// against a stored (src,tgt) dictionary or an invertible (tgt,src) one.
class CipherTranslator : public Translator {
public:
    CipherTranslator(std::vector<BilingualDictionary> dictionaries, NoiseModel noise);

    std::string translate(const std::string& text, const std::string& src,
                          const std::string& tgt) override;

    const NoiseModel& noise() const { return noise_; }

private:
    struct PairMaps {
        std::map<std::string, std::string> word_map;
        std::vector<std::string> targets;  // sorted distinct target words
    };

    std::map<std::pair<std::string, std::string>, PairMaps> maps_;
    NoiseModel noise_;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{100};
    double backoff_multiplier = 2.0;
};

struct HttpTranslatorOptions {
    std::string endpoint;  // e.g. http://127.0.0.1:8080/translate
    std::string token_env = "TRANSLATOR_API_TOKEN";
    std::chrono::milliseconds timeout{10000};
    RetryPolicy retry;
    int max_concurrency = 4;
};

// POSTs {"q": text, "source": src, "target": tgt} and expects
// {"translatedText": ...}. Failures (connect, timeout, non-2xx, bad body)
// retry with exponential backoff up to the policy bound, then surface as
// "translator-unavailable". Requests are bounded by max_concurrency.
class HttpTranslator : public Translator {
public:
    explicit HttpTranslator(HttpTranslatorOptions options);
    ~HttpTranslator() override;

    std::string translate(const std::string& text, const std::string& src,
                          const std::string& tgt) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct TranslatorSpec {
    enum class Kind { Cipher, Http };

    Kind kind = Kind::Cipher;
    // cipher
    std::vector<std::string> dictionary_paths;        // for (de)serialization
    std::vector<BilingualDictionary> dictionaries;    // loaded content
    NoiseModel noise;
    // http
    HttpTranslatorOptions http;

    // {"kind":"cipher","dictionaries":[{"path","source","target"},...],"noise":{...}}
    // or {"kind":"http","endpoint":...,"timeout_ms":...,"retry":{...}}
    nlohmann::json to_json() const;
    static TranslatorSpec from_json(const nlohmann::json& j);
    static TranslatorSpec load(const std::string& path);
};

std::unique_ptr<Translator> make_translator(const TranslatorSpec& spec);

// Synthetic parallel language: bijectively maps each lexicon word to
// "<tag>_<permuted lexicon word>", permutation seeded by `seed`. The result is
// a MUSE-format dictionary from the lexicon language to `tag`.
BilingualDictionary derive_cipher_language(const std::vector<std::string>& lexicon,
                                           const std::string& source_language,
                                           const std::string& language_tag,
                                           std::uint64_t seed);

// Swap source and target sides; requires the mapping to be invertible.
BilingualDictionary invert_dictionary(const BilingualDictionary& dict);

// Join a->b with b->c on the shared middle words, producing a->c.
BilingualDictionary compose_dictionaries(const BilingualDictionary& ab,
                                         const BilingualDictionary& bc);

struct AttackSpec {
    enum class Kind { Direct, Pivot, Cwra };

    Kind kind = Kind::Direct;
    std::string source_language;  // language the text was watermarked in
    std::string target_language;
    std::string pivot_language;   // pivot attacks only

    void validate() const;
    std::string label() const;  // e.g. "direct:de", "pivot:ko+de", "cwra:bn"

    nlohmann::json to_json() const;
    static AttackSpec from_json(const nlohmann::json& j);
};

// direct: src->tgt. pivot: src->tgt then tgt->pivot. cwra: tgt->src (the text
// was generated in the target language; the caller handles generation).
std::string apply_attack(Translator& translator, const AttackSpec& attack,
                         const std::string& text);

}  // namespace xlwm
