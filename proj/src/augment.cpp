// SPDX-License-Identifier: Apache-2.0
#include "uxexplain/augment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uxexplain {

namespace {

std::string join(const TokenSequence& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += tokens[i];
    }
    return out;
}

void check_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("delete probability must lie in [0,1], got " +
                                    std::to_string(p));
    }
}

} // namespace

const std::vector<std::string>* SynonymLexicon::find(const std::string& token) const {
    auto it = entries.find(token);
    return it == entries.end() ? nullptr : &it->second;
}

SynonymLexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open lexicon file " + path.string());
    }

    SynonymLexicon lex;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (std::all_of(line.begin(), line.end(),
                        [](unsigned char c) { return std::isspace(c) != 0; })) {
            continue;
        }

        const auto report = [&](const std::string& what) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": " + what);
        };

        const size_t tab = line.find('\t');
        if (tab == std::string::npos) report("expected `word<TAB>syn1,syn2,...`");
        const std::string word = line.substr(0, tab);
        if (word.empty()) report("empty head word");

        std::vector<std::string> syns;
        std::stringstream rest(line.substr(tab + 1));
        std::string syn;
        while (std::getline(rest, syn, ',')) {
            if (!syn.empty()) syns.push_back(syn);
        }
        if (syns.empty()) report("token \"" + word + "\" maps to an empty synonym list");
        if (syns.size() == 1 && syns[0] == word) {
            report("token \"" + word + "\" lists itself as its only synonym");
        }
        lex.entries[word] = std::move(syns);
    }
    return lex;
}

TokenSequence synonym_replacement(TokenSequence tokens, const SynonymLexicon& lexicon,
                                  size_t n, rng::Stream& stream) {
    if (tokens.empty() || n == 0 || lexicon.empty()) return tokens;

    std::vector<size_t> candidates;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (lexicon.find(tokens[i])) candidates.push_back(i);
    }
    if (candidates.empty()) return tokens;

    for (size_t pick : stream.sample_indices(candidates.size(), n)) {
        const size_t pos = candidates[pick];
        const auto& syns = *lexicon.find(tokens[pos]);
        tokens[pos] = syns[stream.index(syns.size())];
    }
    return tokens;
}

TokenSequence random_insertion(TokenSequence tokens, size_t n, rng::Stream& stream) {
    if (tokens.empty()) return tokens;
    for (size_t i = 0; i < n; ++i) {
        const std::string copy = tokens[stream.index(tokens.size())];
        tokens.insert(tokens.begin() + static_cast<long>(stream.index(tokens.size() + 1)),
                      copy);
    }
    return tokens;
}

TokenSequence random_swap(TokenSequence tokens, size_t n, rng::Stream& stream) {
    if (tokens.size() < 2) return tokens;
    for (size_t i = 0; i < n; ++i) {
        const size_t a = stream.index(tokens.size());
        size_t b = stream.index(tokens.size() - 1);
        if (b >= a) ++b; // uniform over positions != a
        std::swap(tokens[a], tokens[b]);
    }
    return tokens;
}

TokenSequence random_deletion(const TokenSequence& tokens, double p, rng::Stream& stream) {
    check_probability(p);
    if (tokens.empty()) return tokens;

    TokenSequence out;
    for (const std::string& t : tokens) {
        if (!stream.bernoulli(p)) out.push_back(t);
    }
    if (out.empty()) out.push_back(tokens[stream.index(tokens.size())]);
    return out;
}

Corpus augment_corpus(const Corpus& corpus, const SynonymLexicon& lexicon,
                      const AugmentConfig& cfg) {
    check_probability(cfg.p_delete);

    struct Method {
        const char* tag;
        TokenSequence (*apply)(const TokenSequence&, const SynonymLexicon&,
                               const AugmentConfig&, rng::Stream&);
    };
    static constexpr Method kMethods[] = {
        {"sr",
         [](const TokenSequence& t, const SynonymLexicon& lex, const AugmentConfig& c,
            rng::Stream& s) { return synonym_replacement(t, lex, c.n_synonym_ops, s); }},
        {"ri",
         [](const TokenSequence& t, const SynonymLexicon&, const AugmentConfig& c,
            rng::Stream& s) { return random_insertion(t, c.n_insert_ops, s); }},
        {"rs",
         [](const TokenSequence& t, const SynonymLexicon&, const AugmentConfig& c,
            rng::Stream& s) { return random_swap(t, c.n_swap_ops, s); }},
        {"rd",
         [](const TokenSequence& t, const SynonymLexicon&, const AugmentConfig& c,
            rng::Stream& s) { return random_deletion(t, c.p_delete, s); }},
    };

    Corpus out;
    out.records.reserve(corpus.size() * (1 + 4 * cfg.variants_per_method));
    for (const SurveyRecord& rec : corpus.records) {
        out.records.push_back(rec);
        const TokenSequence tokens = tokenize(rec.text);
        if (tokens.empty()) continue; // nothing to perturb

        for (const Method& method : kMethods) {
            for (size_t k = 0; k < cfg.variants_per_method; ++k) {
                rng::Stream stream(rng::derive(cfg.seed, "augment", rec.id, method.tag,
                                               std::to_string(k)));
                SurveyRecord variant;
                variant.id = rec.id + "-" + method.tag + std::to_string(k);
                variant.text = join(method.apply(tokens, lexicon, cfg, stream));
                variant.dimension = rec.dimension;
                variant.label = rec.label;
                variant.meta = rec.meta;
                out.records.push_back(std::move(variant));
            }
        }
    }
    return out;
}

} // namespace uxexplain
