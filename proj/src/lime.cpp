// SPDX-License-Identifier: Apache-2.0
#include "uxexplain/lime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "uxexplain/linalg.hpp"

namespace uxexplain {

double ProximityKernel::weight(double distance) const {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("kernel sigma must be > 0, got " + std::to_string(sigma));
    }
    if (distance < 0.0) {
        throw std::invalid_argument("kernel distance must be >= 0, got " +
                                    std::to_string(distance));
    }
    return std::exp(-(distance * distance) / (sigma * sigma));
}

double cosine_distance_from_full(size_t active_bits, size_t total_bits) {
    if (total_bits == 0 || active_bits == 0) return 1.0;
    return 1.0 - std::sqrt(static_cast<double>(active_bits) /
                           static_cast<double>(total_bits));
}

std::vector<Mask> sample_perturbations(size_t M, size_t n, rng::Stream& stream) {
    if (M < 1) throw std::invalid_argument("mask length must be >= 1");
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");

    std::vector<Mask> masks;
    masks.reserve(n);
    masks.emplace_back(M, uint8_t{1}); // unperturbed instance anchors the fit
    for (size_t i = 1; i < n; ++i) {
        Mask mask(M, uint8_t{1});
        const size_t deactivate = stream.index(M + 1); // uniform in {0..M}
        for (size_t bit : stream.sample_indices(M, deactivate)) mask[bit] = 0;
        masks.push_back(std::move(mask));
    }
    return masks;
}

namespace {

struct WeightedFit {
    double intercept = 0.0;
    std::vector<double> coeffs; // one per selected column
};

// Ridge-regularized weighted least squares on the given mask columns.
// The intercept is never penalized.
WeightedFit solve_wls(const std::vector<Mask>& masks, const std::vector<double>& preds,
                      const std::vector<double>& weights,
                      const std::vector<size_t>& columns, double lambda) {
    const size_t p = columns.size();
    std::vector<std::vector<double>> gram(p + 1, std::vector<double>(p + 1, 0.0));
    std::vector<double> rhs(p + 1, 0.0);

    std::vector<double> row(p + 1, 1.0);
    for (size_t i = 0; i < masks.size(); ++i) {
        for (size_t a = 0; a < p; ++a) row[a + 1] = masks[i][columns[a]];
        const double w = weights[i];
        for (size_t a = 0; a <= p; ++a) {
            if (row[a] == 0.0) continue;
            const double wa = w * row[a];
            for (size_t b = a; b <= p; ++b) gram[a][b] += wa * row[b];
            rhs[a] += wa * preds[i];
        }
    }
    for (size_t a = 0; a <= p; ++a) {
        for (size_t b = 0; b < a; ++b) gram[a][b] = gram[b][a];
    }
    for (size_t a = 1; a <= p; ++a) gram[a][a] += lambda;

    std::vector<double> beta;
    try {
        beta = linalg::solve(std::move(gram), std::move(rhs));
    } catch (const std::runtime_error&) {
        throw std::runtime_error(
            "singular surrogate system; set ridge_lambda > 0 to regularize");
    }

    WeightedFit fit;
    fit.intercept = beta[0];
    fit.coeffs.assign(beta.begin() + 1, beta.end());
    return fit;
}

double weighted_r2(const std::vector<Mask>& masks, const std::vector<double>& preds,
                   const std::vector<double>& weights, const std::vector<size_t>& columns,
                   const WeightedFit& fit) {
    double w_sum = 0.0, y_sum = 0.0;
    for (size_t i = 0; i < preds.size(); ++i) {
        w_sum += weights[i];
        y_sum += weights[i] * preds[i];
    }
    const double y_mean = y_sum / w_sum;

    double ss_res = 0.0, ss_tot = 0.0;
    for (size_t i = 0; i < preds.size(); ++i) {
        double yhat = fit.intercept;
        for (size_t a = 0; a < columns.size(); ++a) {
            yhat += fit.coeffs[a] * masks[i][columns[a]];
        }
        ss_res += weights[i] * (preds[i] - yhat) * (preds[i] - yhat);
        ss_tot += weights[i] * (preds[i] - y_mean) * (preds[i] - y_mean);
    }
    // Constant targets have no variance to explain; rounding can leave
    // ss_tot at ~1e-30 instead of exactly zero.
    if (ss_tot <= 1e-15) {
        return ss_res <= 1e-12 ? 1.0 : -std::numeric_limits<double>::infinity();
    }
    return 1.0 - ss_res / ss_tot;
}

} // namespace

LimeExplanation fit_surrogate(const std::vector<Mask>& masks,
                              const std::vector<double>& preds,
                              const std::vector<double>& weights,
                              const std::vector<std::string>& tokens,
                              const LimeConfig& cfg) {
    if (masks.size() != preds.size() || masks.size() != weights.size()) {
        throw std::invalid_argument("masks, preds and weights must have equal lengths");
    }
    if (masks.size() < 2) {
        throw std::invalid_argument("need at least 2 perturbation samples");
    }
    const size_t M = tokens.size();
    for (const Mask& m : masks) {
        if (m.size() != M) {
            throw std::invalid_argument("mask length does not match token count");
        }
    }
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("proximity weights must be > 0");
    }
    if (cfg.ridge_lambda < 0.0) {
        throw std::invalid_argument("ridge_lambda must be >= 0");
    }
    if (cfg.top_k < 1) throw std::invalid_argument("top_k must be >= 1");

    std::vector<size_t> all_columns(M);
    std::iota(all_columns.begin(), all_columns.end(), size_t{0});
    const WeightedFit full = solve_wls(masks, preds, weights, all_columns, cfg.ridge_lambda);

    // Hard top-k sparsity: keep the largest-|coefficient| tokens, refit on them.
    std::vector<size_t> order(M);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const double fa = std::fabs(full.coeffs[a]);
        const double fb = std::fabs(full.coeffs[b]);
        if (fa != fb) return fa > fb;
        return a < b;
    });
    std::vector<size_t> selected(order.begin(),
                                 order.begin() + std::min(cfg.top_k, M));
    std::sort(selected.begin(), selected.end());

    const WeightedFit refit = solve_wls(masks, preds, weights, selected, cfg.ridge_lambda);

    LimeExplanation exp;
    exp.intercept = refit.intercept;
    exp.local_r2 = weighted_r2(masks, preds, weights, selected, refit);
    for (size_t a = 0; a < selected.size(); ++a) {
        exp.token_weights.emplace_back(tokens[selected[a]], refit.coeffs[a]);
    }
    std::sort(exp.token_weights.begin(), exp.token_weights.end(),
              [](const auto& a, const auto& b) {
                  const double fa = std::fabs(a.second);
                  const double fb = std::fabs(b.second);
                  if (fa != fb) return fa > fb;
                  return a.first < b.first;
              });

    // fx comes from the unperturbed sample when present
    exp.fx = std::numeric_limits<double>::quiet_NaN();
    for (size_t i = 0; i < masks.size(); ++i) {
        if (std::all_of(masks[i].begin(), masks[i].end(),
                        [](uint8_t b) { return b != 0; })) {
            exp.fx = preds[i];
            break;
        }
    }
    return exp;
}

LimeExplanation explain_lime(const RandomForestModel& model, const SurveyRecord& record,
                             const LimeConfig& cfg) {
    if (cfg.n_samples < 10) {
        throw std::invalid_argument("lime n_samples must be >= 10");
    }
    const TokenSequence tokens = tokenize(record.text);
    const std::vector<std::string> distinct = distinct_in_vocab(tokens, model.vocabulary);
    const size_t M = distinct.size();
    if (M == 0) {
        throw std::runtime_error("nothing to explain: record \"" + record.id +
                                 "\" has no in-vocabulary token");
    }

    rng::Stream stream(rng::derive(cfg.seed, "lime", record.id));
    const std::vector<Mask> masks = sample_perturbations(M, cfg.n_samples, stream);

    std::vector<double> preds(masks.size());
    std::vector<double> weights(masks.size());
    for (size_t i = 0; i < masks.size(); ++i) {
        const TokenSequence masked = apply_mask(tokens, model.vocabulary, masks[i]);
        preds[i] = predict_proba(model, vectorize(masked, model.vocabulary)).p_sat;
        const size_t active =
            static_cast<size_t>(std::count(masks[i].begin(), masks[i].end(), uint8_t{1}));
        weights[i] = cfg.kernel.weight(cosine_distance_from_full(active, M));
    }

    return fit_surrogate(masks, preds, weights, distinct, cfg);
}

nlohmann::ordered_json lime_to_json(const LimeExplanation& e, std::string_view id) {
    nlohmann::ordered_json j;
    j["method"] = "lime";
    j["id"] = std::string(id);
    j["fx"] = e.fx;
    j["intercept"] = e.intercept;
    j["local_r2"] = e.local_r2;
    nlohmann::ordered_json ws = nlohmann::ordered_json::array();
    for (const auto& [token, weight] : e.token_weights) {
        ws.push_back(nlohmann::ordered_json::array({token, weight}));
    }
    j["weights"] = std::move(ws);
    return j;
}

LimeExplanation lime_from_json(const nlohmann::json& j) {
    LimeExplanation e;
    e.fx = j.at("fx").get<double>();
    e.intercept = j.at("intercept").get<double>();
    e.local_r2 = j.at("local_r2").is_null() ? 0.0 : j.at("local_r2").get<double>();
    for (const auto& pair : j.at("weights")) {
        e.token_weights.emplace_back(pair.at(0).get<std::string>(),
                                     pair.at(1).get<double>());
    }
    return e;
}

} // namespace uxexplain
