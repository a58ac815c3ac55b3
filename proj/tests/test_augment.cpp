// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <random>

#include "helpers.hpp"
#include "uxexplain/augment.hpp"

using namespace uxexplain;

namespace {

std::multiset<std::string> multiset_of(const TokenSequence& tokens) {
    return {tokens.begin(), tokens.end()};
}

SynonymLexicon lexicon_of(std::map<std::string, std::vector<std::string>> entries) {
    SynonymLexicon lex;
    lex.entries = std::move(entries);
    return lex;
}

} // namespace

TEST_CASE("synonym_replacement substitutes only lexicon-covered positions") {
    const SynonymLexicon lex = lexicon_of({{"stark", {"bleak"}}});
    rng::Stream stream(1);

    CHECK(synonym_replacement({"interface", "is", "stark"}, lex, 1, stream) ==
          TokenSequence{"interface", "is", "bleak"});

    rng::Stream stream2(2);
    CHECK(synonym_replacement({"no", "candidates", "here"}, lex, 3, stream2) ==
          TokenSequence{"no", "candidates", "here"});

    rng::Stream stream3(3);
    CHECK(synonym_replacement({"stark", "stark"}, lex, 0, stream3) ==
          TokenSequence{"stark", "stark"});

    // empty lexicon: identity
    rng::Stream stream4(4);
    CHECK(synonym_replacement({"stark"}, {}, 5, stream4) == TokenSequence{"stark"});
}

TEST_CASE("synonym_replacement preserves length and non-lexicon tokens") {
    const SynonymLexicon lex =
        lexicon_of({{"province", {"region", "territory"}}, {"doctor", {"physician"}}});
    std::mt19937 gen(17);
    const std::vector<std::string> pool = {"province", "doctor", "wechat", "health", "online"};

    for (int round = 0; round < 300; ++round) {
        TokenSequence tokens;
        const size_t len = 1 + gen() % 12;
        for (size_t i = 0; i < len; ++i) tokens.push_back(pool[gen() % pool.size()]);

        rng::Stream stream(gen());
        const TokenSequence out = synonym_replacement(tokens, lex, gen() % 4, stream);
        REQUIRE(out.size() == tokens.size());
        for (size_t i = 0; i < tokens.size(); ++i) {
            if (!lex.find(tokens[i])) CHECK(out[i] == tokens[i]);
        }
    }
}

TEST_CASE("random_insertion duplicates existing tokens") {
    rng::Stream stream(1);
    CHECK(random_insertion({"friendly"}, 1, stream) ==
          TokenSequence{"friendly", "friendly"});

    rng::Stream stream2(2);
    CHECK(random_insertion({"a", "b"}, 0, stream2) == TokenSequence{"a", "b"});

    // output multiset contains the input multiset
    rng::Stream stream3(7);
    const TokenSequence in = {"v", "w", "x", "y", "z"};
    const TokenSequence out = random_insertion(in, 3, stream3);
    REQUIRE(out.size() == 8);
    const auto out_ms = multiset_of(out);
    const auto in_ms = multiset_of(in);
    for (const std::string& t : in) CHECK(out_ms.count(t) >= 1);
    CHECK(std::includes(out_ms.begin(), out_ms.end(), in_ms.begin(), in_ms.end()));
}

TEST_CASE("random_swap permutes without changing the multiset") {
    rng::Stream stream(1);
    CHECK(random_swap({"a", "b"}, 1, stream) == TokenSequence{"b", "a"});

    rng::Stream stream2(2);
    CHECK(random_swap({"only"}, 5, stream2) == TokenSequence{"only"});

    std::mt19937 gen(23);
    const std::vector<std::string> pool = {"p", "q", "r", "s"};
    for (int round = 0; round < 500; ++round) {
        TokenSequence tokens;
        const size_t len = 1 + gen() % 10;
        for (size_t i = 0; i < len; ++i) tokens.push_back(pool[gen() % pool.size()]);

        rng::Stream stream3(gen());
        const TokenSequence out = random_swap(tokens, gen() % 5, stream3);
        CHECK(out.size() == tokens.size());
        CHECK(multiset_of(out) == multiset_of(tokens));
    }
}

TEST_CASE("random_deletion: identity at p=0, single survivor at p=1, never empty") {
    const TokenSequence tokens = {"a", "b", "c", "d"};

    rng::Stream stream(1);
    CHECK(random_deletion(tokens, 0.0, stream) == tokens);

    rng::Stream stream2(2);
    const TokenSequence survived = random_deletion(tokens, 1.0, stream2);
    REQUIRE(survived.size() == 1);
    CHECK(std::find(tokens.begin(), tokens.end(), survived[0]) != tokens.end());

    CHECK_THROWS_AS(random_deletion(tokens, 1.5, stream2), std::invalid_argument);
    CHECK_THROWS_AS(random_deletion(tokens, -0.1, stream2), std::invalid_argument);

    std::mt19937 gen(31);
    const std::vector<std::string> pool = {"m", "n", "o"};
    for (int round = 0; round < 500; ++round) {
        TokenSequence in;
        const size_t len = 1 + gen() % 8;
        for (size_t i = 0; i < len; ++i) in.push_back(pool[gen() % pool.size()]);

        rng::Stream stream3(gen());
        const TokenSequence out =
            random_deletion(in, static_cast<double>(gen() % 101) / 100.0, stream3);
        CHECK(!out.empty());
        const auto in_ms = multiset_of(in);
        const auto out_ms = multiset_of(out);
        CHECK(std::includes(in_ms.begin(), in_ms.end(), out_ms.begin(), out_ms.end()));
    }
}

TEST_CASE("random_deletion mean surviving length matches the binomial mean") {
    const TokenSequence tokens(10, "t");
    rng::Stream stream(99);
    double total = 0.0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        total += static_cast<double>(random_deletion(tokens, 0.3, stream).size());
    }
    const double mean = total / trials;
    CHECK(mean == doctest::Approx(7.0).epsilon(0.015)); // 7.0 +/- ~0.1
}

TEST_CASE("load_lexicon parses TSV and validates entries") {
    uxtest::TempDir tmp("lexicon");

    SUBCASE("valid file with comments and blanks") {
        const auto path = uxtest::write_file(tmp.path / "lex.tsv",
                                             "# comment\n"
                                             "\n"
                                             "stark\tbleak,austere\n"
                                             "province\tregion\n");
        const SynonymLexicon lex = load_lexicon(path);
        REQUIRE(lex.entries.size() == 2);
        CHECK(*lex.find("stark") == std::vector<std::string>{"bleak", "austere"});
        CHECK(lex.find("unlisted") == nullptr);
    }
    SUBCASE("missing tab") {
        const auto path = uxtest::write_file(tmp.path / "bad.tsv", "stark bleak\n");
        CHECK_THROWS_WITH_AS(load_lexicon(path), doctest::Contains("bad.tsv:1"),
                             std::runtime_error);
    }
    SUBCASE("empty synonym list") {
        const auto path = uxtest::write_file(tmp.path / "empty.tsv", "stark\t\n");
        CHECK_THROWS_WITH_AS(load_lexicon(path), doctest::Contains("empty synonym list"),
                             std::runtime_error);
    }
    SUBCASE("self-only synonym") {
        const auto path = uxtest::write_file(tmp.path / "self.tsv", "stark\tstark\n");
        CHECK_THROWS_WITH_AS(load_lexicon(path),
                             doctest::Contains("lists itself as its only synonym"),
                             std::runtime_error);
    }
}

TEST_CASE("augment_corpus expands per method and copies labels") {
    Corpus c;
    for (int i = 0; i < 10; ++i) {
        c.records.push_back(uxtest::record(
            "r" + std::to_string(i), "interface is stark but helpful",
            kAllDimensions[static_cast<size_t>(i) % 6],
            i % 2 == 0 ? SatisfactionLabel::Satisfied : SatisfactionLabel::Unsatisfied));
    }
    const SynonymLexicon lex = lexicon_of({{"stark", {"bleak"}}});

    AugmentConfig cfg;
    cfg.variants_per_method = 1;
    cfg.seed = 5;
    const Corpus out = augment_corpus(c, lex, cfg);
    CHECK(out.size() == 50); // 10 originals + 4 methods x 10

    // originals preserved, variants inherit dimension and label
    std::map<std::string, const SurveyRecord*> by_id;
    for (const SurveyRecord& r : out.records) by_id[r.id] = &r;
    for (const SurveyRecord& r : c.records) {
        REQUIRE(by_id.count(r.id) == 1);
        CHECK(*by_id[r.id] == r);
        for (const char* tag : {"-sr0", "-ri0", "-rs0", "-rd0"}) {
            const auto it = by_id.find(r.id + tag);
            REQUIRE(it != by_id.end());
            CHECK(it->second->dimension == r.dimension);
            CHECK(it->second->label == r.label);
            CHECK(!it->second->text.empty());
        }
    }

    // determinism and the identity config
    CHECK(augment_corpus(c, lex, cfg) == out);
    AugmentConfig zero;
    zero.variants_per_method = 0;
    CHECK(augment_corpus(c, lex, zero) == c);
}

TEST_CASE("augment_corpus skips records that tokenize to nothing") {
    Corpus c;
    c.records.push_back(uxtest::record("punct", "!!!", HoneycombDimension::Usability,
                                       SatisfactionLabel::Satisfied));
    AugmentConfig cfg;
    cfg.variants_per_method = 2;
    const Corpus out = augment_corpus(c, {}, cfg);
    CHECK(out.size() == 1); // no variants, original kept
}
