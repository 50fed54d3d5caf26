#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace xlwm {

struct VocabEntry {
    std::string token;
    std::uint32_t id = 0;
    bool full_word = false;
};

// Frequency-capped word vocabulary with single-character fallback.
//
// Full-word tokens are whitespace-delimited words whose corpus frequency is
// at least min_word_freq (capped at max_words by descending frequency, ties
// broken lexicographically); every non-whitespace character seen in the
// corpus becomes a character token. Ids are assigned full words first, then
// characters, both in their sort order. Whitespace is a separator and never
// a token. A string may exist both as a full word and as a character token;
// token identity is the (string, full_word) pair.
class Vocabulary {
public:
    Vocabulary() = default;

    static Vocabulary build(const std::vector<std::string>& corpus,
                            std::size_t min_word_freq, std::size_t max_words);

    std::size_t size() const { return entries_.size(); }
    const VocabEntry& entry(std::uint32_t id) const { return entries_.at(id); }
    const std::vector<VocabEntry>& entries() const { return entries_; }

    std::optional<std::uint32_t> word_id(std::string_view word) const;
    std::optional<std::uint32_t> char_id(std::string_view ch) const;
    bool has_full_word(std::string_view word) const { return word_id(word).has_value(); }

    nlohmann::json to_json() const;
    static Vocabulary from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

private:
    std::vector<VocabEntry> entries_;
    std::unordered_map<std::string, std::uint32_t> word_ids_;
    std::unordered_map<std::string, std::uint32_t> char_ids_;

    void rebuild_index();
};

struct TokenSequence {
    std::vector<std::uint32_t> ids;
    std::string language;  // BCP-47-style tag, informational
};

// One pair per line in MUSE files: "source_word<TAB or single space>target_word".
struct BilingualDictionary {
    std::string source_language;
    std::string target_language;
    std::vector<std::pair<std::string, std::string>> pairs;  // deduplicated

    static BilingualDictionary from_pairs(std::string src_lang, std::string tgt_lang,
                                          std::vector<std::pair<std::string, std::string>> pairs);
    static BilingualDictionary load_muse(const std::string& path, std::string src_lang,
                                         std::string tgt_lang);
    void save_muse(const std::string& path) const;
};

// Greedy word-then-character segmentation: each whitespace-delimited word maps
// to its full-word token if present, otherwise to its character tokens in
// order. Characters missing from the vocabulary are skipped; the skip count is
// reported through skipped_out when given.
TokenSequence tokenize(const Vocabulary& vocab, std::string_view text,
                       std::string language = {}, std::size_t* skipped_out = nullptr);

// Token strings joined with single spaces.
std::string detokenize(const Vocabulary& vocab, const TokenSequence& seq);

enum class DictSide { Source, Target };

// Fraction of distinct dictionary words on the chosen side that exist in the
// vocabulary as full-word tokens.
double full_word_coverage(const Vocabulary& vocab, const BilingualDictionary& dict,
                          DictSide side);

// The k most frequent tokens over the tokenized corpus with their share of
// all tokens, descending; ties broken by token string, full words first.
std::vector<std::pair<std::string, double>> top_token_shares(
    const Vocabulary& vocab, const std::vector<std::string>& corpus, std::size_t k);

// Split on ASCII whitespace (space, \t, \n, \r, \v, \f).
std::vector<std::string> split_words(std::string_view text);

// Split a string into UTF-8 code points (invalid bytes pass through one by one).
std::vector<std::string> utf8_chars(std::string_view word);

}  // namespace xlwm
