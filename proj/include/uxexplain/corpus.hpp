// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace uxexplain {

/// The six User Experience Honeycomb facets this toolkit evaluates.
enum class HoneycombDimension {
    Usability,
    Usefulness,
    Desirability,
    Findability,
    Accessibility,
    Credibility,
};

inline constexpr std::array<HoneycombDimension, 6> kAllDimensions = {
    HoneycombDimension::Usability,    HoneycombDimension::Usefulness,
    HoneycombDimension::Desirability, HoneycombDimension::Findability,
    HoneycombDimension::Accessibility, HoneycombDimension::Credibility,
};

std::string_view to_string(HoneycombDimension d);

/// Lowercase form used in file names and seed tags.
std::string dimension_key(HoneycombDimension d);

/// Throws std::invalid_argument for anything outside the six facet names.
HoneycombDimension parse_dimension(std::string_view name);

/// Binary satisfaction ground truth; serialized as 0 / 1.
enum class SatisfactionLabel : int {
    Unsatisfied = 0,
    Satisfied = 1,
};

std::string_view to_string(SatisfactionLabel l);

/// One free-text survey response annotated with the facet it answers
/// and the respondent's satisfaction decision.
struct SurveyRecord {
    std::string id;
    std::string text;
    HoneycombDimension dimension{};
    SatisfactionLabel label{};
    std::map<std::string, std::string> meta;

    bool operator==(const SurveyRecord&) const = default;
};

/// Ordered record collection. Iteration order is insertion order.
struct Corpus {
    std::vector<SurveyRecord> records;

    size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }

    bool operator==(const Corpus&) const = default;
};

/// Checks record invariants: non-blank text, unique ids.
/// Throws std::invalid_argument on the first violation.
void validate_corpus(const Corpus& c);

/// Reads a JSONL corpus file, one record object per line:
///   {"id": "...", "text": "...", "dimension": "Usability", "label": 1, "meta": {...}}
/// Blank lines are skipped. Errors carry the file path and line number.
Corpus load_corpus(const std::filesystem::path& path);

/// Writes the corpus in the same JSONL schema; empty meta is omitted.
void save_corpus(const Corpus& c, const std::filesystem::path& path);

/// Stratified train/test split on (dimension, label). Per-stratum test
/// counts are round(fraction * stratum size), clamped so both sides of
/// every stratum stay non-empty. Record order follows the input corpus.
/// Throws if test_fraction is outside (0,1) or a stratum has < 2 records.
std::pair<Corpus, Corpus> split_stratified(const Corpus& c, double test_fraction,
                                           uint64_t seed);

/// Planted vocabulary used by generate_synthetic. Positive / negative
/// keywords occur only in records of their own class; fillers occur in
/// both, so explainer sign checks have known ground truth.
const std::vector<std::string>& positive_keyword_pool();
const std::vector<std::string>& negative_keyword_pool();
const std::vector<std::string>& filler_pool();

/// Deterministic survey-corpus generator: n_per_dimension records for
/// each facet, labels alternating Satisfied/Unsatisfied, text made of
/// filler tokens plus 1-3 planted keywords of the record's class.
/// Pure function of (seed, n_per_dimension). Requires n_per_dimension >= 2.
Corpus generate_synthetic(uint64_t seed, size_t n_per_dimension);

} // namespace uxexplain
