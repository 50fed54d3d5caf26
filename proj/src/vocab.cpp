#include "xlwm/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "xlwm/error.hpp"

namespace xlwm {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::size_t utf8_len(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xE) return 3;
    if ((lead >> 3) == 0x1E) return 4;
    return 1;  // invalid lead byte, consume it alone
}

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) words.emplace_back(text.substr(start, i - start));
    }
    return words;
}

std::vector<std::string> utf8_chars(std::string_view word) {
    std::vector<std::string> chars;
    std::size_t i = 0;
    while (i < word.size()) {
        std::size_t len = utf8_len(static_cast<unsigned char>(word[i]));
        if (i + len > word.size()) len = 1;
        chars.emplace_back(word.substr(i, len));
        i += len;
    }
    return chars;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus,
                             std::size_t min_word_freq, std::size_t max_words) {
    if (corpus.empty()) {
        throw Error("empty-corpus", "vocabulary requires a non-empty corpus");
    }

    std::map<std::string, std::uint64_t> word_freq;
    std::set<std::string> chars;
    for (const std::string& doc : corpus) {
        for (const std::string& word : split_words(doc)) {
            ++word_freq[word];
            for (const std::string& ch : utf8_chars(word)) {
                chars.insert(ch);
            }
        }
    }

    std::vector<std::pair<std::string, std::uint64_t>> words;
    for (const auto& [word, freq] : word_freq) {
        if (freq >= min_word_freq) words.emplace_back(word, freq);
    }
    std::sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (words.size() > max_words) words.resize(max_words);

    Vocabulary vocab;
    for (const auto& [word, freq] : words) {
        (void)freq;
        vocab.entries_.push_back({word, static_cast<std::uint32_t>(vocab.entries_.size()), true});
    }
    for (const std::string& ch : chars) {
        vocab.entries_.push_back({ch, static_cast<std::uint32_t>(vocab.entries_.size()), false});
    }
    vocab.rebuild_index();
    return vocab;
}

void Vocabulary::rebuild_index() {
    word_ids_.clear();
    char_ids_.clear();
    for (const VocabEntry& e : entries_) {
        if (e.full_word) {
            word_ids_.emplace(e.token, e.id);
        } else {
            char_ids_.emplace(e.token, e.id);
        }
    }
}

std::optional<std::uint32_t> Vocabulary::word_id(std::string_view word) const {
    auto it = word_ids_.find(std::string(word));
    if (it == word_ids_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> Vocabulary::char_id(std::string_view ch) const {
    auto it = char_ids_.find(std::string(ch));
    if (it == char_ids_.end()) return std::nullopt;
    return it->second;
}

nlohmann::json Vocabulary::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const VocabEntry& e : entries_) {
        arr.push_back({{"token", e.token}, {"id", e.id}, {"word", e.full_word}});
    }
    return arr;
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
    Vocabulary vocab;
    for (const auto& item : j) {
        VocabEntry e;
        e.token = item.at("token").get<std::string>();
        e.id = item.at("id").get<std::uint32_t>();
        e.full_word = item.at("word").get<bool>();
        if (e.id != vocab.entries_.size()) {
            throw Error("bad-vocabulary", "token ids must be 0..size-1 ascending");
        }
        vocab.entries_.push_back(std::move(e));
    }
    vocab.rebuild_index();
    if (vocab.word_ids_.size() + vocab.char_ids_.size() != vocab.entries_.size()) {
        throw Error("bad-vocabulary", "duplicate token within a class");
    }
    return vocab;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("io-error", "cannot write " + path);
    out << to_json().dump(2) << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

BilingualDictionary BilingualDictionary::from_pairs(
    std::string src_lang, std::string tgt_lang,
    std::vector<std::pair<std::string, std::string>> pairs) {
    BilingualDictionary dict;
    dict.source_language = std::move(src_lang);
    dict.target_language = std::move(tgt_lang);
    std::set<std::pair<std::string, std::string>> seen;
    for (auto& p : pairs) {
        if (p.first.empty() || p.second.empty()) {
            throw Error("bad-dictionary", "empty word in dictionary pair");
        }
        if (seen.insert(p).second) {
            dict.pairs.push_back(std::move(p));
        }
    }
    return dict;
}

BilingualDictionary BilingualDictionary::load_muse(const std::string& path,
                                                   std::string src_lang,
                                                   std::string tgt_lang) {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read " + path);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t sep = line.find('\t');
        if (sep == std::string::npos) sep = line.find(' ');
        if (sep == std::string::npos || sep == 0 || sep + 1 >= line.size()) {
            throw Error("bad-dictionary",
                        path + ":" + std::to_string(lineno) + ": expected 'source<sep>target'");
        }
        pairs.emplace_back(line.substr(0, sep), line.substr(sep + 1));
    }
    return from_pairs(std::move(src_lang), std::move(tgt_lang), std::move(pairs));
}

void BilingualDictionary::save_muse(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("io-error", "cannot write " + path);
    for (const auto& [src, tgt] : pairs) {
        out << src << '\t' << tgt << '\n';
    }
}

TokenSequence tokenize(const Vocabulary& vocab, std::string_view text,
                       std::string language, std::size_t* skipped_out) {
    TokenSequence seq;
    seq.language = std::move(language);
    std::size_t skipped = 0;
    for (const std::string& word : split_words(text)) {
        if (auto id = vocab.word_id(word)) {
            seq.ids.push_back(*id);
            continue;
        }
        for (const std::string& ch : utf8_chars(word)) {
            if (auto id = vocab.char_id(ch)) {
                seq.ids.push_back(*id);
            } else {
                ++skipped;
            }
        }
    }
    if (skipped_out) *skipped_out = skipped;
    return seq;
}

std::string detokenize(const Vocabulary& vocab, const TokenSequence& seq) {
    std::string out;
    for (std::size_t i = 0; i < seq.ids.size(); ++i) {
        if (i > 0) out += ' ';
        out += vocab.entry(seq.ids[i]).token;
    }
    return out;
}

double full_word_coverage(const Vocabulary& vocab, const BilingualDictionary& dict,
                          DictSide side) {
    if (dict.pairs.empty()) {
        throw Error("empty-dictionary", "coverage requires a non-empty dictionary");
    }
    std::set<std::string> words;
    for (const auto& [src, tgt] : dict.pairs) {
        words.insert(side == DictSide::Source ? src : tgt);
    }
    std::size_t covered = 0;
    for (const std::string& w : words) {
        if (vocab.has_full_word(w)) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(words.size());
}

std::vector<std::pair<std::string, double>> top_token_shares(
    const Vocabulary& vocab, const std::vector<std::string>& corpus, std::size_t k) {
    if (k < 1) throw Error("bad-arguments", "k must be >= 1");
    std::vector<std::uint64_t> counts(vocab.size(), 0);
    std::uint64_t total = 0;
    for (const std::string& doc : corpus) {
        TokenSequence seq = tokenize(vocab, doc);
        for (std::uint32_t id : seq.ids) {
            ++counts[id];
            ++total;
        }
    }
    if (total == 0) {
        throw Error("empty-tokenization", "corpus produced no tokens");
    }

    std::vector<std::uint32_t> ids;
    for (std::uint32_t id = 0; id < counts.size(); ++id) {
        if (counts[id] > 0) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (counts[a] != counts[b]) return counts[a] > counts[b];
        const VocabEntry& ea = vocab.entry(a);
        const VocabEntry& eb = vocab.entry(b);
        if (ea.token != eb.token) return ea.token < eb.token;
        return ea.full_word && !eb.full_word;
    });
    if (ids.size() > k) ids.resize(k);

    std::vector<std::pair<std::string, double>> shares;
    shares.reserve(ids.size());
    for (std::uint32_t id : ids) {
        shares.emplace_back(vocab.entry(id).token,
                            static_cast<double>(counts[id]) / static_cast<double>(total));
    }
    return shares;
}

}  // namespace xlwm
