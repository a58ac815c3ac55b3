// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uxexplain/forest.hpp"
#include "uxexplain/rng.hpp"
#include "uxexplain/vectorize.hpp"

namespace uxexplain {

/// Exponential proximity weighting exp(-D^2 / sigma^2). The distance D
/// is cosine distance between a perturbation mask and the all-ones
/// reference mask, so it lies in [0,1] and grows monotonically with the
/// number of deactivated tokens.
struct ProximityKernel {
    double sigma = 25.0;

    double weight(double distance) const;
};

/// D(full, mask) = 1 - sqrt(active_bits / M); 1 for the all-zeros mask.
double cosine_distance_from_full(size_t active_bits, size_t total_bits);

struct LimeConfig {
    size_t n_samples = 5000;
    size_t top_k = 10;          // sparsity budget of the surrogate
    double ridge_lambda = 1.0;
    ProximityKernel kernel{};
    uint64_t seed = 0;
};

/// Sparse local surrogate: per-token linear weights around one instance.
struct LimeExplanation {
    std::vector<std::pair<std::string, double>> token_weights; // sorted by |weight| desc
    double intercept = 0.0;
    double local_r2 = 0.0; // weighted R^2 of the top-k refit
    double fx = 0.0;       // model probability at the full instance
};

/// n masks of length M. The all-ones mask always comes first; the rest
/// deactivate a uniform k-subset with k uniform in {0,...,M}.
std::vector<Mask> sample_perturbations(size_t M, size_t n, rng::Stream& stream);

/// Weighted ridge least squares of preds on mask bits, followed by
/// hard top-k selection by |coefficient| and a refit on the selected
/// features only. local_r2 is the weighted R^2 of the refit. `tokens`
/// names the mask coordinates. Throws when inputs disagree in length,
/// are shorter than 2, have a non-positive weight, or when lambda = 0
/// leaves the normal equations singular.
LimeExplanation fit_surrogate(const std::vector<Mask>& masks,
                              const std::vector<double>& preds,
                              const std::vector<double>& weights,
                              const std::vector<std::string>& tokens,
                              const LimeConfig& cfg);

/// Full pipeline on one record: perturbation sampling, masked
/// predictions (p_sat is the regression target), proximity weights,
/// surrogate fit. Deterministic per (cfg.seed, record id). Throws when
/// the record has no in-vocabulary token.
LimeExplanation explain_lime(const RandomForestModel& model, const SurveyRecord& record,
                             const LimeConfig& cfg);

nlohmann::ordered_json lime_to_json(const LimeExplanation& e, std::string_view id);
LimeExplanation lime_from_json(const nlohmann::json& j);

} // namespace uxexplain
