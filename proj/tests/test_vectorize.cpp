// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "uxexplain/vectorize.hpp"

using namespace uxexplain;

TEST_CASE("tokenize applies the lowercase/strip/split rules") {
    CHECK(tokenize("Interface is friendly.") ==
          TokenSequence{"interface", "is", "friendly"});
    CHECK(tokenize("") == TokenSequence{});
    CHECK(tokenize("WeChat, WeChat!") == TokenSequence{"wechat", "wechat"});
    CHECK(tokenize("  spaced\tout\nwords ") == TokenSequence{"spaced", "out", "words"});
    CHECK(tokenize("don't stop") == TokenSequence{"don't", "stop"});
    CHECK(tokenize("...!!!") == TokenSequence{});
    CHECK(tokenize("(quoted)") == TokenSequence{"quoted"});
}

TEST_CASE("tokenize splits on non-ASCII whitespace and keeps CJK text") {
    // U+00A0 no-break space and U+3000 ideographic space
    CHECK(tokenize("a\xc2\xa0g") == TokenSequence{"a", "g"});
    CHECK(tokenize("界面\xe3\x80\x80好用") == TokenSequence{"界面", "好用"});
}

TEST_CASE("tokenize is idempotent under re-joining with single spaces") {
    std::mt19937 gen(11);
    const std::vector<std::string> samples = {
        "Interface IS stark!!",
        "wechat, guangdong; platform?",
        "don't   mix\ttabs and  spaces",
        "(friendly) [cultural] {helpful}",
        "trailing dots... and CAPS",
    };
    for (const std::string& text : samples) {
        const TokenSequence once = tokenize(text);
        std::string rejoined;
        for (size_t i = 0; i < once.size(); ++i) {
            if (i > 0) rejoined += ' ';
            rejoined += once[i];
        }
        CHECK(tokenize(rejoined) == once);
    }
}

TEST_CASE("build_vocabulary filters by document frequency and orders deterministically") {
    Corpus c;
    c.records.push_back(uxtest::record("1", "wechat aaa bbb", HoneycombDimension::Usability,
                                       SatisfactionLabel::Satisfied));
    c.records.push_back(uxtest::record("2", "wechat aaa bbb", HoneycombDimension::Usability,
                                       SatisfactionLabel::Unsatisfied));
    c.records.push_back(uxtest::record("3", "wechat rare", HoneycombDimension::Usability,
                                       SatisfactionLabel::Satisfied));

    const Vocabulary v = Vocabulary::build(c, 2);
    REQUIRE(v.size() == 3);
    CHECK(v.token_at(0) == "wechat"); // df 3
    CHECK(v.token_at(1) == "aaa");    // df 2, tie broken lexicographically
    CHECK(v.token_at(2) == "bbb");
    CHECK(!v.index_of("rare").has_value()); // df 1 < min_df
    CHECK(v.index_of("wechat") == 0u);

    CHECK_THROWS_AS(Vocabulary::build(c, 0), std::invalid_argument);
    CHECK_THROWS_WITH_AS(Vocabulary::build(c, 10), doctest::Contains("empty vocabulary"),
                         std::runtime_error);
}

TEST_CASE("vocabulary JSON round-trip preserves index order and hash") {
    const Vocabulary v = uxtest::vocab_of({"friendly", "stark", "wechat"});
    const Vocabulary back = Vocabulary::from_json(v.to_json());
    CHECK(back == v);
    CHECK(back.content_hash() == v.content_hash());

    const Vocabulary other = uxtest::vocab_of({"friendly", "stark"});
    CHECK(other.content_hash() != v.content_hash());
}

TEST_CASE("vectorize emits binary presence features") {
    const Vocabulary v = uxtest::vocab_of({"friendly", "interface", "stark"});

    CHECK(vectorize({"unseen", "tokens"}, v).active.empty());
    CHECK(vectorize({"friendly", "friendly"}, v) == vectorize({"friendly"}, v));

    const FeatureVector fv = vectorize({"stark", "interface", "stark", "friendly"}, v);
    CHECK(fv.active.size() == 3);
    CHECK(fv.dim == 3);
    CHECK(fv.contains(*v.index_of("stark")));
}

TEST_CASE("apply_mask removes occurrences of deactivated tokens") {
    const Vocabulary v = uxtest::vocab_of({"good", "bad"});
    const TokenSequence tokens = {"good", "bad", "good"};

    CHECK(apply_mask(tokens, v, Mask{1, 1}) == tokens);
    CHECK(apply_mask(tokens, v, Mask{0, 0}) == TokenSequence{});
    // distinct order is first occurrence: good then bad
    CHECK(apply_mask(tokens, v, Mask{0, 1}) == TokenSequence{"bad"});
    CHECK(apply_mask(tokens, v, Mask{1, 0}) == TokenSequence{"good", "good"});

    CHECK_THROWS_WITH_AS(apply_mask(tokens, v, Mask{1}), doctest::Contains("mask length"),
                         std::invalid_argument);
}

TEST_CASE("apply_mask keeps out-of-vocabulary tokens") {
    const Vocabulary v = uxtest::vocab_of({"good"});
    const TokenSequence tokens = {"oov", "good", "oov"};
    CHECK(apply_mask(tokens, v, Mask{0}) == TokenSequence{"oov", "oov"});
}

TEST_CASE("masking and vectorization commute on in-vocabulary features") {
    const Vocabulary v = uxtest::vocab_of({"a", "b", "c", "d", "e"});
    std::mt19937 gen(5);
    const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "x", "y"};

    for (int round = 0; round < 200; ++round) {
        TokenSequence tokens;
        const size_t len = 1 + gen() % 10;
        for (size_t i = 0; i < len; ++i) tokens.push_back(pool[gen() % pool.size()]);

        const std::vector<std::string> distinct = distinct_in_vocab(tokens, v);
        Mask mask(distinct.size());
        for (auto& bit : mask) bit = gen() % 2;

        const FeatureVector masked_fv = vectorize(apply_mask(tokens, v, mask), v);

        // expected active set: kept distinct tokens only
        std::vector<uint32_t> expected;
        for (size_t i = 0; i < distinct.size(); ++i) {
            if (mask[i]) expected.push_back(*v.index_of(distinct[i]));
        }
        std::sort(expected.begin(), expected.end());
        CHECK(masked_fv.active == expected);
    }
}
