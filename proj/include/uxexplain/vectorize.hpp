// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "uxexplain/corpus.hpp"

namespace uxexplain {

using TokenSequence = std::vector<std::string>;

/// Presence bits over the distinct in-vocabulary tokens of one instance,
/// in first-occurrence order. Shared by all three explainers.
using Mask = std::vector<uint8_t>;

/// Lowercases, splits on Unicode whitespace, strips leading/trailing
/// ASCII punctuation per token, drops tokens that become empty.
/// No stemming, no stopword removal; CJK text passes through whole.
TokenSequence tokenize(std::string_view text);

/// Token <-> dense feature index bijection. Indices are ordered by
/// descending document frequency with lexicographic tie-break, so the
/// assignment is a pure function of the corpus.
class Vocabulary {
public:
    Vocabulary() = default;

    /// Keeps tokens whose document frequency is >= min_df (min_df >= 1).
    /// Throws if the result would be empty.
    static Vocabulary build(const Corpus& corpus, size_t min_df);

    std::optional<uint32_t> index_of(std::string_view token) const;
    const std::string& token_at(size_t index) const { return tokens_.at(index); }
    size_t size() const { return tokens_.size(); }
    size_t min_df() const { return min_df_; }

    /// FNV-1a over the token list; model files store this to detect
    /// vocabulary/model mismatches.
    uint64_t content_hash() const;

    /// Serialized as a JSON array of tokens in index order.
    nlohmann::ordered_json to_json() const;
    static Vocabulary from_json(const nlohmann::json& j);

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, uint32_t> index_;
    size_t min_df_ = 0;

    void rebuild_index();
};

/// Binary presence encoding: sorted active feature indices, no counts.
struct FeatureVector {
    std::vector<uint32_t> active; // strictly increasing
    uint32_t dim = 0;

    bool contains(uint32_t feature) const;
    bool operator==(const FeatureVector&) const = default;
};

/// Index i is active iff vocabulary token i occurs at least once.
FeatureVector vectorize(const TokenSequence& tokens, const Vocabulary& vocab);

/// Distinct in-vocabulary tokens of an instance in first-occurrence
/// order; defines the mask coordinate system for the explainers.
std::vector<std::string> distinct_in_vocab(const TokenSequence& tokens,
                                           const Vocabulary& vocab);

/// Removes every occurrence of distinct tokens whose mask bit is 0.
/// Out-of-vocabulary tokens are always kept; order is preserved.
/// Throws if the mask length does not match the distinct-token count.
TokenSequence apply_mask(const TokenSequence& tokens, const Vocabulary& vocab,
                         const Mask& mask);

} // namespace uxexplain
