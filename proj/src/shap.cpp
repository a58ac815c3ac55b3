// SPDX-License-Identifier: Apache-2.0
#include "uxexplain/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

#include "uxexplain/linalg.hpp"

namespace uxexplain {

namespace {

double binomial(size_t n, size_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double result = 1.0;
    for (size_t i = 1; i <= k; ++i) {
        result *= static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return result;
}

Mask mask_from_bits(uint32_t bits, size_t M) {
    Mask mask(M, 0);
    for (size_t j = 0; j < M; ++j) {
        if (bits & (uint32_t{1} << j)) mask[j] = 1;
    }
    return mask;
}

// Solves the constrained weighted least squares shared by exact and
// sampled modes. phi0 = v(empty) and sum(phi) = v(full) - v(empty) are
// eliminated, leaving M-1 free variables with features z_j - z_last.
ShapValues solve_constrained_wls(const std::vector<Mask>& masks,
                                 const std::vector<double>& values,
                                 const std::vector<double>& weights, size_t M,
                                 double v_empty, double v_full) {
    ShapValues out;
    out.phi0 = v_empty;
    out.fx = v_full;
    if (M == 1) {
        out.phis = {v_full - v_empty};
        return out;
    }

    const size_t p = M - 1;
    std::vector<std::vector<double>> gram(p, std::vector<double>(p, 0.0));
    std::vector<double> rhs(p, 0.0);
    std::vector<double> x(p, 0.0);

    for (size_t i = 0; i < masks.size(); ++i) {
        const Mask& z = masks[i];
        const double z_last = z[M - 1];
        for (size_t a = 0; a < p; ++a) x[a] = static_cast<double>(z[a]) - z_last;
        const double target = values[i] - v_empty - z_last * (v_full - v_empty);
        const double w = weights[i];
        for (size_t a = 0; a < p; ++a) {
            if (x[a] == 0.0) continue;
            const double wxa = w * x[a];
            for (size_t b = a; b < p; ++b) gram[a][b] += wxa * x[b];
            rhs[a] += wxa * target;
        }
    }
    for (size_t a = 0; a < p; ++a) {
        for (size_t b = 0; b < a; ++b) gram[a][b] = gram[b][a];
    }

    std::vector<double> phi_free = linalg::solve(std::move(gram), std::move(rhs));

    out.phis.assign(M, 0.0);
    double partial = 0.0;
    for (size_t a = 0; a < p; ++a) {
        out.phis[a] = phi_free[a];
        partial += phi_free[a];
    }
    out.phis[M - 1] = (v_full - v_empty) - partial; // efficiency by construction
    return out;
}

} // namespace

double shapley_kernel_weight(size_t M, size_t s) {
    if (s == 0 || s >= M) {
        throw std::invalid_argument(
            "shapley kernel weight is undefined for s=0 or s=M (constraint cases)");
    }
    return static_cast<double>(M - 1) /
           (binomial(M, s) * static_cast<double>(s) * static_cast<double>(M - s));
}

ShapValues exact_shapley_oracle(const CoalitionValueFn& value, size_t M) {
    if (M < 1 || M > 20) {
        throw std::invalid_argument("oracle supports 1 <= M <= 20, got " +
                                    std::to_string(M));
    }

    const uint32_t n_masks = uint32_t{1} << M;
    std::vector<double> table(n_masks);
    for (uint32_t bits = 0; bits < n_masks; ++bits) {
        table[bits] = value(mask_from_bits(bits, M));
    }

    // w[s] = s! (M-1-s)! / M!, exact in long double for M <= 20
    std::vector<long double> factorial(M + 1, 1.0L);
    for (size_t i = 1; i <= M; ++i) factorial[i] = factorial[i - 1] * i;
    std::vector<long double> w(M, 0.0L);
    for (size_t s = 0; s < M; ++s) {
        w[s] = factorial[s] * factorial[M - 1 - s] / factorial[M];
    }

    ShapValues out;
    out.phi0 = table[0];
    out.fx = table[n_masks - 1];
    out.phis.assign(M, 0.0);
    for (size_t j = 0; j < M; ++j) {
        const uint32_t bit = uint32_t{1} << j;
        long double phi = 0.0L;
        for (uint32_t bits = 0; bits < n_masks; ++bits) {
            if (bits & bit) continue;
            const auto s = static_cast<size_t>(std::popcount(bits));
            phi += w[s] * (table[bits | bit] - table[bits]);
        }
        out.phis[j] = static_cast<double>(phi);
    }
    return out;
}

ShapValues kernel_shap_exact(const CoalitionValueFn& value, size_t M) {
    if (M < 1 || M > 25) {
        throw std::invalid_argument("exact mode supports 1 <= M <= 25, got " +
                                    std::to_string(M));
    }

    const double v_empty = value(Mask(M, 0));
    const double v_full = value(Mask(M, 1));
    if (M == 1) return solve_constrained_wls({}, {}, {}, M, v_empty, v_full);

    const uint32_t n_masks = uint32_t{1} << M;
    std::vector<Mask> masks;
    std::vector<double> values, weights;
    masks.reserve(n_masks - 2);
    for (uint32_t bits = 1; bits + 1 < n_masks; ++bits) {
        Mask mask = mask_from_bits(bits, M);
        values.push_back(value(mask));
        weights.push_back(
            shapley_kernel_weight(M, static_cast<size_t>(std::popcount(bits))));
        masks.push_back(std::move(mask));
    }
    return solve_constrained_wls(masks, values, weights, M, v_empty, v_full);
}

ShapValues kernel_shap_sampled(const CoalitionValueFn& value, size_t M,
                               size_t n_coalitions, rng::Stream& stream) {
    if (M < 1) throw std::invalid_argument("M must be >= 1");
    if (n_coalitions < 2 * M + 2) {
        throw std::invalid_argument("n_coalitions must be >= 2M+2 = " +
                                    std::to_string(2 * M + 2) + ", got " +
                                    std::to_string(n_coalitions));
    }

    const double v_empty = value(Mask(M, 0));
    const double v_full = value(Mask(M, 1));
    if (M == 1) return solve_constrained_wls({}, {}, {}, M, v_empty, v_full);

    // Coalition sizes follow the kernel-proportional distribution
    // P(s) ~ (M-1)/(s(M-s)); the subset of that size is uniform. With
    // that sampling the least squares itself uses unit weights.
    std::vector<double> cumulative(M - 1, 0.0);
    double total = 0.0;
    for (size_t s = 1; s < M; ++s) {
        total += static_cast<double>(M - 1) /
                 (static_cast<double>(s) * static_cast<double>(M - s));
        cumulative[s - 1] = total;
    }

    const auto draw_size = [&]() -> size_t {
        const double u = stream.unit() * total;
        const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
        return static_cast<size_t>(it - cumulative.begin()) + 1;
    };

    std::vector<Mask> masks;
    std::vector<double> values, weights;
    masks.reserve(n_coalitions);
    while (masks.size() < n_coalitions) {
        const size_t s = draw_size();
        Mask mask(M, 0);
        for (size_t bit : stream.sample_indices(M, s)) mask[bit] = 1;

        Mask complement(M, 0); // same sampling probability by symmetry
        for (size_t j = 0; j < M; ++j) complement[j] = mask[j] ? 0 : 1;

        values.push_back(value(mask));
        weights.push_back(1.0);
        masks.push_back(std::move(mask));
        if (masks.size() < n_coalitions) {
            values.push_back(value(complement));
            weights.push_back(1.0);
            masks.push_back(std::move(complement));
        }
    }
    return solve_constrained_wls(masks, values, weights, M, v_empty, v_full);
}

ShapExplanation explain_shap(const RandomForestModel& model, const SurveyRecord& record,
                             const ShapConfig& cfg) {
    if (cfg.exact_limit < 1) throw std::invalid_argument("exact_limit must be >= 1");

    const TokenSequence tokens = tokenize(record.text);
    const std::vector<std::string> distinct = distinct_in_vocab(tokens, model.vocabulary);
    const size_t M = distinct.size();
    if (M == 0) {
        throw std::runtime_error("nothing to explain: record \"" + record.id +
                                 "\" has no in-vocabulary token");
    }

    const CoalitionValueFn value = [&](const Mask& mask) {
        const TokenSequence masked = apply_mask(tokens, model.vocabulary, mask);
        return predict_proba(model, vectorize(masked, model.vocabulary)).p_sat;
    };

    ShapValues values;
    ShapMode mode;
    if (M <= cfg.exact_limit) {
        mode = ShapMode::Exact;
        values = kernel_shap_exact(value, M);
    } else {
        mode = ShapMode::Sampled;
        rng::Stream stream(rng::derive(cfg.seed, "shap", record.id));
        values = kernel_shap_sampled(value, M, cfg.n_coalitions, stream);
    }

    ShapExplanation exp;
    exp.phi0 = values.phi0;
    exp.fx = values.fx;
    exp.mode = mode;
    for (size_t j = 0; j < M; ++j) {
        exp.phis.emplace_back(distinct[j], values.phis[j]);
    }
    return exp;
}

GlobalShapSummary aggregate_global(const std::vector<ShapExplanation>& explanations) {
    std::map<std::string, TokenShapStats> stats; // ordered for deterministic ties
    for (const ShapExplanation& exp : explanations) {
        for (const auto& [token, phi] : exp.phis) {
            TokenShapStats& s = stats[token];
            s.token = token;
            s.mean_abs_phi += std::fabs(phi);
            s.mean_phi += phi;
            s.count += 1;
            s.points.emplace_back(phi, exp.fx);
        }
    }

    GlobalShapSummary summary;
    for (auto& [token, s] : stats) {
        s.mean_abs_phi /= static_cast<double>(s.count);
        s.mean_phi /= static_cast<double>(s.count);
        summary.tokens.push_back(std::move(s));
    }
    std::sort(summary.tokens.begin(), summary.tokens.end(),
              [](const TokenShapStats& a, const TokenShapStats& b) {
                  if (a.mean_abs_phi != b.mean_abs_phi) {
                      return a.mean_abs_phi > b.mean_abs_phi;
                  }
                  return a.token < b.token;
              });
    return summary;
}

nlohmann::ordered_json shap_to_json(const ShapExplanation& e, std::string_view id) {
    nlohmann::ordered_json j;
    j["method"] = "shap";
    j["id"] = std::string(id);
    j["phi0"] = e.phi0;
    j["fx"] = e.fx;
    j["mode"] = e.mode == ShapMode::Exact ? "exact" : "sampled";
    nlohmann::ordered_json phis = nlohmann::ordered_json::array();
    for (const auto& [token, phi] : e.phis) {
        phis.push_back(nlohmann::ordered_json::array({token, phi}));
    }
    j["phis"] = std::move(phis);
    return j;
}

ShapExplanation shap_from_json(const nlohmann::json& j) {
    ShapExplanation e;
    e.phi0 = j.at("phi0").get<double>();
    e.fx = j.at("fx").get<double>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "exact") {
        e.mode = ShapMode::Exact;
    } else if (mode == "sampled") {
        e.mode = ShapMode::Sampled;
    } else {
        throw std::invalid_argument("unknown shap mode \"" + mode + "\"");
    }
    for (const auto& pair : j.at("phis")) {
        e.phis.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<double>());
    }
    return e;
}

} // namespace uxexplain
