// SPDX-License-Identifier: Apache-2.0
#include "uxexplain/vectorize.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace uxexplain {

namespace {

// Unicode whitespace code points beyond ASCII.
bool is_space_codepoint(uint32_t cp) {
    if (cp == 0x20 || (cp >= 0x09 && cp <= 0x0d)) return true;
    switch (cp) {
        case 0x85: case 0xa0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202f: case 0x205f: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200a;
    }
}

bool is_ascii_punct(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

// Decodes one UTF-8 code point; malformed bytes are passed through as
// single opaque code points so tokenization never throws.
uint32_t decode_utf8(std::string_view s, size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    size_t len = 1;
    uint32_t cp = b0;
    if ((b0 & 0xe0) == 0xc0) { len = 2; cp = b0 & 0x1f; }
    else if ((b0 & 0xf0) == 0xe0) { len = 3; cp = b0 & 0x0f; }
    else if ((b0 & 0xf8) == 0xf0) { len = 4; cp = b0 & 0x07; }
    if (len > 1) {
        for (size_t k = 1; k < len; ++k) {
            if (i + k >= s.size() ||
                (static_cast<unsigned char>(s[i + k]) & 0xc0) != 0x80) {
                i += 1;
                return b0; // malformed; consume one byte
            }
            cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
        }
    }
    i += len;
    return cp;
}

void push_token(TokenSequence& out, std::string raw) {
    size_t begin = 0;
    size_t end = raw.size();
    while (begin < end && is_ascii_punct(raw[begin])) ++begin;
    while (end > begin && is_ascii_punct(raw[end - 1])) --end;
    if (end > begin) out.push_back(raw.substr(begin, end - begin));
}

} // namespace

TokenSequence tokenize(std::string_view text) {
    TokenSequence out;
    std::string current;
    size_t i = 0;
    while (i < text.size()) {
        const size_t start = i;
        const uint32_t cp = decode_utf8(text, i);
        if (is_space_codepoint(cp)) {
            if (!current.empty()) {
                push_token(out, std::move(current));
                current.clear();
            }
        } else {
            for (size_t k = start; k < i; ++k) {
                char c = text[k];
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
                current += c;
            }
        }
    }
    if (!current.empty()) push_token(out, std::move(current));
    return out;
}

Vocabulary Vocabulary::build(const Corpus& corpus, size_t min_df) {
    if (min_df < 1) {
        throw std::invalid_argument("min_df must be >= 1, got " + std::to_string(min_df));
    }

    std::map<std::string, size_t> df; // ordered: deterministic iteration
    for (const SurveyRecord& r : corpus.records) {
        std::set<std::string> distinct;
        for (std::string& t : tokenize(r.text)) distinct.insert(std::move(t));
        for (const std::string& t : distinct) ++df[t];
    }

    std::vector<std::pair<std::string, size_t>> kept;
    for (auto& [token, count] : df) {
        if (count >= min_df) kept.emplace_back(token, count);
    }
    if (kept.empty()) {
        throw std::runtime_error("empty vocabulary: min_df=" + std::to_string(min_df) +
                                 " pruned every token");
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    v.min_df_ = min_df;
    v.tokens_.reserve(kept.size());
    for (auto& [token, count] : kept) v.tokens_.push_back(std::move(token));
    v.rebuild_index();
    return v;
}

void Vocabulary::rebuild_index() {
    index_.clear();
    index_.reserve(tokens_.size());
    for (size_t i = 0; i < tokens_.size(); ++i) {
        index_.emplace(tokens_[i], static_cast<uint32_t>(i));
    }
}

std::optional<uint32_t> Vocabulary::index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

uint64_t Vocabulary::content_hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const std::string& t : tokens_) {
        for (unsigned char c : t) h = (h ^ c) * 0x100000001b3ULL;
        h = (h ^ 0x0a) * 0x100000001b3ULL;
    }
    return h;
}

nlohmann::ordered_json Vocabulary::to_json() const {
    return nlohmann::ordered_json(tokens_);
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
    if (!j.is_array()) {
        throw std::invalid_argument("vocabulary JSON must be an array of tokens");
    }
    Vocabulary v;
    for (const auto& t : j) {
        if (!t.is_string()) {
            throw std::invalid_argument("vocabulary JSON must contain only strings");
        }
        v.tokens_.push_back(t.get<std::string>());
    }
    v.rebuild_index();
    if (v.index_.size() != v.tokens_.size()) {
        throw std::invalid_argument("vocabulary JSON contains duplicate tokens");
    }
    return v;
}

bool FeatureVector::contains(uint32_t feature) const {
    return std::binary_search(active.begin(), active.end(), feature);
}

FeatureVector vectorize(const TokenSequence& tokens, const Vocabulary& vocab) {
    FeatureVector fv;
    fv.dim = static_cast<uint32_t>(vocab.size());
    for (const std::string& t : tokens) {
        if (auto idx = vocab.index_of(t)) fv.active.push_back(*idx);
    }
    std::sort(fv.active.begin(), fv.active.end());
    fv.active.erase(std::unique(fv.active.begin(), fv.active.end()), fv.active.end());
    return fv;
}

std::vector<std::string> distinct_in_vocab(const TokenSequence& tokens,
                                           const Vocabulary& vocab) {
    std::vector<std::string> out;
    std::set<std::string_view> seen;
    for (const std::string& t : tokens) {
        if (!vocab.index_of(t)) continue;
        if (seen.insert(t).second) out.push_back(t);
    }
    return out;
}

TokenSequence apply_mask(const TokenSequence& tokens, const Vocabulary& vocab,
                         const Mask& mask) {
    const std::vector<std::string> distinct = distinct_in_vocab(tokens, vocab);
    if (mask.size() != distinct.size()) {
        throw std::invalid_argument("mask length " + std::to_string(mask.size()) +
                                    " does not match distinct in-vocabulary token count " +
                                    std::to_string(distinct.size()));
    }
    std::unordered_map<std::string_view, bool> keep;
    for (size_t i = 0; i < distinct.size(); ++i) keep.emplace(distinct[i], mask[i] != 0);

    TokenSequence out;
    for (const std::string& t : tokens) {
        auto it = keep.find(t);
        if (it != keep.end() && !it->second) continue; // masked out
        out.push_back(t);
    }
    return out;
}

} // namespace uxexplain
