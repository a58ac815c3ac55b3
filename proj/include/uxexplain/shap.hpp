// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uxexplain/forest.hpp"
#include "uxexplain/rng.hpp"
#include "uxexplain/vectorize.hpp"

namespace uxexplain {

struct ShapConfig {
    size_t exact_limit = 12;   // instances with M <= exact_limit use exact mode
    size_t n_coalitions = 4096; // sampled mode budget; must be >= 2M+2
    uint64_t seed = 0;
};

enum class ShapMode { Exact, Sampled };

/// Additive attribution: base value plus one phi per distinct token.
/// In exact mode phi0 + sum(phi) equals fx up to solver arithmetic.
struct ShapExplanation {
    double phi0 = 0.0; // value of the empty coalition
    std::vector<std::pair<std::string, double>> phis; // one per token, instance order
    double fx = 0.0;   // value of the full coalition
    ShapMode mode = ShapMode::Exact;
};

/// Coalition weighting (M-1) / (C(M,s) * s * (M-s)) for 0 < s < M.
/// The empty and full coalitions are equality constraints, not weights;
/// passing s = 0 or s = M throws.
double shapley_kernel_weight(size_t M, size_t s);

/// Coalition value oracle; the mask has one bit per player.
using CoalitionValueFn = std::function<double(const Mask&)>;

struct ShapValues {
    double phi0 = 0.0;
    std::vector<double> phis;
    double fx = 0.0;
};

/// Classical enumeration phi_j = sum over S of |S|!(M-|S|-1)!/M! *
/// (v(S+j) - v(S)). Independent of the weighted-least-squares path;
/// kept as the verification oracle. Requires M <= 20 (2^M evaluations).
ShapValues exact_shapley_oracle(const CoalitionValueFn& value, size_t M);

/// Weighted least squares over all 2^M coalitions with the Shapley
/// kernel and the two constraints g(empty) = v(empty),
/// g(full) = v(full), handled by variable elimination. Equals the
/// exact Shapley values. Requires 1 <= M <= 25.
ShapValues kernel_shap_exact(const CoalitionValueFn& value, size_t M);

/// Same constrained system, but over n_coalitions masks drawn from the
/// kernel-proportional size distribution (complement-paired to cut
/// variance). Requires n_coalitions >= 2M+2.
ShapValues kernel_shap_sampled(const CoalitionValueFn& value, size_t M,
                               size_t n_coalitions, rng::Stream& stream);

/// Explains one record: v(S) = p_sat of the instance with only
/// coalition tokens kept. Mode is exact when M <= cfg.exact_limit,
/// sampled otherwise; deterministic per (cfg.seed, record id).
ShapExplanation explain_shap(const RandomForestModel& model, const SurveyRecord& record,
                             const ShapConfig& cfg);

/// Per-token aggregate over many explanations, ranked by mean |phi|.
struct TokenShapStats {
    std::string token;
    double mean_abs_phi = 0.0;
    double mean_phi = 0.0;
    size_t count = 0;
    std::vector<std::pair<double, double>> points; // (phi, fx) in input order
};

struct GlobalShapSummary {
    std::vector<TokenShapStats> tokens;
};

GlobalShapSummary aggregate_global(const std::vector<ShapExplanation>& explanations);

nlohmann::ordered_json shap_to_json(const ShapExplanation& e, std::string_view id);
ShapExplanation shap_from_json(const nlohmann::json& j);

} // namespace uxexplain
