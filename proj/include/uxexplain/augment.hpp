// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "uxexplain/corpus.hpp"
#include "uxexplain/rng.hpp"
#include "uxexplain/vectorize.hpp"

namespace uxexplain {

/// Lowercase token -> ordered synonym list. Loaded from a TSV file so
/// the substitution behavior stays auditable and dependency-free.
struct SynonymLexicon {
    std::map<std::string, std::vector<std::string>> entries;

    bool empty() const { return entries.empty(); }
    const std::vector<std::string>* find(const std::string& token) const;
};

/// TSV format: `word<TAB>syn1,syn2,...`, lowercase, UTF-8.
/// Blank lines and lines starting with '#' are ignored.
SynonymLexicon load_lexicon(const std::filesystem::path& path);

struct AugmentConfig {
    size_t n_synonym_ops = 1;
    size_t n_insert_ops = 1;
    size_t n_swap_ops = 1;
    double p_delete = 0.1;
    size_t variants_per_method = 1;
    uint64_t seed = 0;
};

/// Replaces up to n lexicon-covered tokens (positions chosen uniformly
/// without replacement) with a uniformly chosen synonym. Length is
/// unchanged; tokens without a lexicon entry are never touched.
TokenSequence synonym_replacement(TokenSequence tokens, const SynonymLexicon& lexicon,
                                  size_t n, rng::Stream& stream);

/// Inserts n copies of uniformly chosen existing tokens at uniformly
/// chosen positions. Output length = input length + n.
TokenSequence random_insertion(TokenSequence tokens, size_t n, rng::Stream& stream);

/// Applies n swaps of two uniformly chosen distinct positions in
/// sequence. Token multiset and length are unchanged; no-op below
/// length 2.
TokenSequence random_swap(TokenSequence tokens, size_t n, rng::Stream& stream);

/// Deletes each token independently with probability p. If every token
/// would be deleted, one uniformly chosen token is retained instead, so
/// the output is never empty (for non-empty input).
TokenSequence random_deletion(const TokenSequence& tokens, double p, rng::Stream& stream);

/// Expands a corpus with variants_per_method variants per method per
/// record, in record order: each original followed by its variants
/// (methods in the fixed order sr, ri, rs, rd). Variants copy dimension
/// and label; ids get a "-<method><k>" suffix. Records that tokenize to
/// nothing are copied without variants. Deterministic per cfg.seed:
/// every variant draws from a stream keyed by (seed, record id, method, k).
Corpus augment_corpus(const Corpus& corpus, const SynonymLexicon& lexicon,
                      const AugmentConfig& cfg);

} // namespace uxexplain
