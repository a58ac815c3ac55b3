// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "uxexplain/forest.hpp"
#include "uxexplain/rng.hpp"
#include "uxexplain/vectorize.hpp"

namespace uxexplain {

struct AnchorConfig {
    double tau = 0.95;    // precision threshold
    double delta = 0.05;  // confidence level for the lower bound
    size_t batch = 100;   // samples per precision update
    size_t max_samples_per_candidate = 10000;
    size_t max_anchor_size = 4;
    double keep_prob = 0.5; // survival probability of non-anchor tokens
    uint64_t seed = 0;
};

/// A token subset whose presence keeps the model's prediction fixed
/// with estimated precision, plus a Hoeffding lower bound at confidence
/// 1-delta. converged implies precision_lower_bound >= tau.
struct AnchorResult {
    std::vector<std::string> anchor; // greedy insertion order
    double precision_estimate = 0.0;
    double precision_lower_bound = 0.0;
    double coverage_estimate = 0.0; // fraction of perturbation space matching
    size_t samples_used = 0;
    bool converged = false;
};

/// Hoeffding bound half-width sqrt(ln(1/delta) / (2n)).
double hoeffding_halfwidth(double delta, size_t n);

/// n masks over the instance's distinct in-vocabulary tokens: anchor
/// tokens are always active, every other token survives independently
/// with probability keep_prob. Throws if anchor is not a subset of
/// the distinct tokens.
std::vector<Mask> sample_conditional(const std::vector<std::string>& distinct_tokens,
                                     const std::vector<std::string>& anchor, size_t n,
                                     double keep_prob, rng::Stream& stream);

struct PrecisionEstimate {
    double estimate = 0.0;
    double lower_bound = 0.0;
    size_t samples_used = 0;
};

/// Draws batches of conditional samples and counts how often the
/// prediction on the masked text matches the prediction on the full
/// instance. Stops when the lower bound clears tau, when even the
/// upper bound cannot reach tau, or at the sample budget.
PrecisionEstimate estimate_precision(const RandomForestModel& model,
                                     const SurveyRecord& record,
                                     const std::vector<std::string>& anchor,
                                     const AnchorConfig& cfg);

/// Greedy anchor construction: starting from the empty anchor, each
/// step scores every single-token extension on a fixed budget of
/// cfg.batch samples (ties go to the lexicographically smallest token)
/// and confirms the grown anchor with estimate_precision. Stops once
/// the confirmed lower bound reaches tau or the anchor hits
/// max_anchor_size. Coverage is estimated from unconditional samples.
/// Deterministic per (cfg.seed, record id); throws when the record has
/// no in-vocabulary token.
AnchorResult find_anchor(const RandomForestModel& model, const SurveyRecord& record,
                         const AnchorConfig& cfg);

nlohmann::ordered_json anchor_to_json(const AnchorResult& r, std::string_view id);
AnchorResult anchor_from_json(const nlohmann::json& j);

} // namespace uxexplain
