#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <map>

#include "xlwm/error.hpp"
#include "xlwm/rng.hpp"
#include "xlwm/vocab.hpp"

using namespace xlwm;

namespace {

std::vector<std::string> tiny_lexicon() {
    return {"lake", "stone", "river", "moss", "pine", "cloud", "fox", "owl"};
}

std::vector<std::string> random_corpus(std::uint64_t seed, std::size_t sentences) {
    const auto lexicon = tiny_lexicon();
    SplitMix64 rng(seed);
    std::vector<std::string> corpus;
    for (std::size_t s = 0; s < sentences; ++s) {
        std::string line;
        const std::size_t len = 3 + rng.next_below(6);
        for (std::size_t w = 0; w < len; ++w) {
            if (w > 0) line += ' ';
            line += lexicon[rng.next_below(lexicon.size())];
        }
        corpus.push_back(line);
    }
    return corpus;
}

}  // namespace

TEST_CASE("build: frequent words become full words, characters always fall back") {
    const Vocabulary vocab = Vocabulary::build({"a a b"}, 2, 10);
    // ["a"(word), "a"(char), "b"(char)]; whitespace is never a token.
    REQUIRE(vocab.size() == 3);
    CHECK(vocab.entry(0).token == "a");
    CHECK(vocab.entry(0).full_word);
    CHECK(vocab.entry(1).token == "a");
    CHECK_FALSE(vocab.entry(1).full_word);
    CHECK(vocab.entry(2).token == "b");
    CHECK_FALSE(vocab.entry(2).full_word);
}

TEST_CASE("build: frequency below threshold forces fragmentation") {
    const Vocabulary vocab = Vocabulary::build({"x"}, 2, 10);
    REQUIRE(vocab.size() == 1);
    CHECK(vocab.entry(0).token == "x");
    CHECK_FALSE(vocab.entry(0).full_word);
}

TEST_CASE("build: empty corpus is an error") {
    CHECK_THROWS_WITH_AS(Vocabulary::build({}, 1, 10), doctest::Contains("empty-corpus"),
                         Error);
}

TEST_CASE("build: full-word set matches a brute-force frequency count") {
    const auto corpus = random_corpus(11, 1000);
    const std::size_t min_freq = 5;
    const Vocabulary vocab = Vocabulary::build(corpus, min_freq, 100000);

    // Independent oracle: count word frequencies directly.
    std::map<std::string, std::size_t> freq;
    for (const std::string& line : corpus) {
        std::size_t start = 0;
        while (start < line.size()) {
            std::size_t end = line.find(' ', start);
            if (end == std::string::npos) end = line.size();
            if (end > start) ++freq[line.substr(start, end - start)];
            start = end + 1;
        }
    }
    for (const auto& [word, count] : freq) {
        CHECK(vocab.has_full_word(word) == (count >= min_freq));
    }
    // A 1000-sentence corpus over an 8-word lexicon covers everything.
    for (const std::string& word : tiny_lexicon()) {
        CHECK(vocab.has_full_word(word));
    }
}

TEST_CASE("build: lexicon coverage matches an independent frequency oracle") {
    // 1000 synthetic sentences over a 50-word lexicon; the coverage of the
    // lexicon follows directly from an independent word-frequency count.
    std::vector<std::string> lexicon;
    for (int i = 0; i < 50; ++i) lexicon.push_back("lex" + std::to_string(i));
    SplitMix64 rng(404);
    std::vector<std::string> corpus;
    for (int s = 0; s < 1000; ++s) {
        std::string line;
        // Skewed sampling so some words fall below the frequency floor.
        const std::size_t len = 2 + rng.next_below(5);
        for (std::size_t w = 0; w < len; ++w) {
            if (w > 0) line += ' ';
            const auto a = rng.next_below(50);
            const auto b = rng.next_below(50);
            line += lexicon[std::min(a, b)];
        }
        corpus.push_back(line);
    }

    const std::size_t min_freq = 5;
    const Vocabulary vocab = Vocabulary::build(corpus, min_freq, 100000);

    std::map<std::string, std::size_t> freq;
    for (const std::string& line : corpus) {
        for (const std::string& word : split_words(line)) ++freq[word];
    }
    std::size_t expected_covered = 0;
    for (const std::string& word : lexicon) {
        if (freq[word] >= min_freq) ++expected_covered;
    }

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const std::string& word : lexicon) pairs.emplace_back(word, "xx_" + word);
    const auto dict = BilingualDictionary::from_pairs("en", "xx", pairs);
    CHECK(full_word_coverage(vocab, dict, DictSide::Source) ==
          doctest::Approx(static_cast<double>(expected_covered) / 50.0));
}

TEST_CASE("build: byte-identical serialization for identical inputs") {
    const auto corpus = random_corpus(3, 200);
    const std::string a = Vocabulary::build(corpus, 2, 50).to_json().dump();
    const std::string b = Vocabulary::build(corpus, 2, 50).to_json().dump();
    CHECK(a == b);
}

TEST_CASE("build: max_words caps by descending frequency with lexicographic ties") {
    const Vocabulary vocab = Vocabulary::build({"b b b c c a a z z z"}, 2, 2);
    // freq: b=3, z=3, c=2, a=2 -> keep b, z.
    CHECK(vocab.has_full_word("b"));
    CHECK(vocab.has_full_word("z"));
    CHECK_FALSE(vocab.has_full_word("a"));
    CHECK_FALSE(vocab.has_full_word("c"));
}

TEST_CASE("tokenize: word lookup then character fallback") {
    const Vocabulary vocab = Vocabulary::build({"a a b"}, 2, 10);
    const TokenSequence seq = tokenize(vocab, "a b");
    REQUIRE(seq.ids.size() == 2);
    CHECK(seq.ids[0] == 0);  // "a" full word
    CHECK(seq.ids[1] == 2);  // "b" character
}

TEST_CASE("tokenize: empty text gives an empty sequence") {
    const Vocabulary vocab = Vocabulary::build({"a a b"}, 2, 10);
    CHECK(tokenize(vocab, "").ids.empty());
}

TEST_CASE("tokenize: unknown characters are skipped and counted") {
    const Vocabulary vocab = Vocabulary::build({"a a b"}, 2, 10);
    std::size_t skipped = 0;
    const TokenSequence seq = tokenize(vocab, "a q", {}, &skipped);
    CHECK(seq.ids.size() == 1);
    CHECK(skipped == 1);
}

TEST_CASE("round trip on full-word text equals whitespace-normalized input") {
    const auto corpus = random_corpus(17, 500);
    const Vocabulary vocab = Vocabulary::build(corpus, 1, 100000);
    SplitMix64 rng(5);
    const auto lexicon = tiny_lexicon();
    for (int trial = 0; trial < 50; ++trial) {
        std::string text;
        const std::size_t len = 1 + rng.next_below(12);
        for (std::size_t w = 0; w < len; ++w) {
            if (w > 0) text += (rng.next_below(4) == 0) ? "  \t " : " ";
            text += lexicon[rng.next_below(lexicon.size())];
        }
        std::string normalized;
        for (const std::string& word : split_words(text)) {
            if (!normalized.empty()) normalized += ' ';
            normalized += word;
        }
        CHECK(detokenize(vocab, tokenize(vocab, text)) == normalized);
    }
}

TEST_CASE("utf8 characters are kept whole") {
    const Vocabulary vocab = Vocabulary::build({"\xC3\xA9\xC3\xA9 x"}, 5, 10);
    // "é" twice in one word, below word threshold: chars are é and x.
    CHECK(vocab.char_id("\xC3\xA9").has_value());
    const TokenSequence seq = tokenize(vocab, "\xC3\xA9");
    REQUIRE(seq.ids.size() == 1);
    CHECK(vocab.entry(seq.ids[0]).token == "\xC3\xA9");
}

TEST_CASE("coverage: hand-counted example") {
    const Vocabulary vocab = Vocabulary::build({"casa casa"}, 2, 10);
    const auto dict = BilingualDictionary::from_pairs(
        "en", "es", {{"house", "casa"}, {"dog", "perro"}});
    CHECK(full_word_coverage(vocab, dict, DictSide::Target) == doctest::Approx(0.5));
}

TEST_CASE("coverage: all present gives 1.0, empty dictionary is an error") {
    const Vocabulary vocab = Vocabulary::build({"casa casa perro perro"}, 2, 10);
    const auto dict = BilingualDictionary::from_pairs(
        "en", "es", {{"house", "casa"}, {"dog", "perro"}});
    CHECK(full_word_coverage(vocab, dict, DictSide::Target) == 1.0);

    const BilingualDictionary empty{"en", "es", {}};
    CHECK_THROWS_WITH_AS(full_word_coverage(vocab, empty, DictSide::Source),
                         doctest::Contains("empty-dictionary"), Error);
}

TEST_CASE("coverage never increases when min_word_freq rises") {
    const auto corpus = random_corpus(23, 300);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const std::string& word : tiny_lexicon()) pairs.emplace_back(word, "xx_" + word);
    const auto dict = BilingualDictionary::from_pairs("en", "xx", pairs);

    double previous = 1.0;
    for (std::size_t min_freq : {1u, 5u, 20u, 80u, 300u, 10000u}) {
        const Vocabulary vocab = Vocabulary::build(corpus, min_freq, 100000);
        const double coverage = full_word_coverage(vocab, dict, DictSide::Source);
        CHECK(coverage <= previous);
        previous = coverage;
    }
}

TEST_CASE("top token shares: hand count and ordering invariants") {
    const Vocabulary vocab = Vocabulary::build({"a a b"}, 5, 10);  // chars only
    const auto shares = top_token_shares(vocab, {"a a b"}, 3);
    REQUIRE(shares.size() == 2);
    CHECK(shares[0].first == "a");
    CHECK(shares[0].second == doctest::Approx(2.0 / 3.0));
    CHECK(shares[1].first == "b");
    CHECK(shares[1].second == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("top token shares: uniform corpus of distinct tokens") {
    const Vocabulary vocab = Vocabulary::build({"q w e r"}, 5, 10);
    const auto shares = top_token_shares(vocab, {"q w e r"}, 10);
    REQUIRE(shares.size() == 4);
    for (const auto& [token, share] : shares) {
        (void)token;
        CHECK(share == doctest::Approx(0.25));
    }
}

TEST_CASE("top token shares: non-increasing and sum <= 1") {
    const auto corpus = random_corpus(31, 400);
    const Vocabulary vocab = Vocabulary::build(corpus, 3, 100000);
    const auto shares = top_token_shares(vocab, corpus, 5);
    double sum = 0.0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        if (i > 0) CHECK(shares[i].second <= shares[i - 1].second);
        sum += shares[i].second;
    }
    CHECK(sum <= 1.0 + 1e-12);

    CHECK_THROWS_WITH_AS(top_token_shares(vocab, {"@@@ ###"}, 2),
                         doctest::Contains("empty-tokenization"), Error);
}

TEST_CASE("vocabulary json round trip") {
    const auto corpus = random_corpus(41, 100);
    const Vocabulary vocab = Vocabulary::build(corpus, 2, 1000);
    const Vocabulary reloaded = Vocabulary::from_json(vocab.to_json());
    CHECK(vocab.to_json() == reloaded.to_json());
}

TEST_CASE("muse loader handles tab and space separators and dedupes") {
    const std::string path = "test_vocab_muse.txt";
    {
        std::ofstream out(path);
        out << "house casa\n";
        out << "dog\tperro\n";
        out << "house casa\n";
    }
    const auto dict = BilingualDictionary::load_muse(path, "en", "es");
    CHECK(dict.pairs.size() == 2);
    std::remove(path.c_str());
}
