// SPDX-License-Identifier: Apache-2.0
#include "uxexplain/anchor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uxexplain {

namespace {

void check_config(const AnchorConfig& cfg) {
    if (!(cfg.tau > 0.0 && cfg.tau <= 1.0)) {
        throw std::invalid_argument("tau must lie in (0,1], got " + std::to_string(cfg.tau));
    }
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
        throw std::invalid_argument("delta must lie in (0,1), got " +
                                    std::to_string(cfg.delta));
    }
    if (cfg.batch < 1) throw std::invalid_argument("batch must be >= 1");
    if (!(cfg.keep_prob >= 0.0 && cfg.keep_prob <= 1.0)) {
        throw std::invalid_argument("keep_prob must lie in [0,1], got " +
                                    std::to_string(cfg.keep_prob));
    }
}

// Instance state shared by the search steps.
struct InstanceContext {
    const RandomForestModel& model;
    TokenSequence tokens;
    std::vector<std::string> distinct;
    SatisfactionLabel full_prediction;

    InstanceContext(const RandomForestModel& m, const SurveyRecord& record)
        : model(m),
          tokens(tokenize(record.text)),
          distinct(distinct_in_vocab(tokens, m.vocabulary)) {
        if (distinct.empty()) {
            throw std::runtime_error("nothing to explain: record \"" + record.id +
                                     "\" has no in-vocabulary token");
        }
        full_prediction = predict(model, vectorize(tokens, model.vocabulary));
    }

    size_t M() const { return distinct.size(); }

    Mask draw_conditional(const std::vector<uint8_t>& anchor_bits, double keep_prob,
                          rng::Stream& stream) const {
        Mask mask(M(), 0);
        for (size_t j = 0; j < M(); ++j) {
            mask[j] = anchor_bits[j] != 0 || stream.bernoulli(keep_prob) ? 1 : 0;
        }
        return mask;
    }

    bool prediction_holds(const Mask& mask) const {
        const TokenSequence masked = apply_mask(tokens, model.vocabulary, mask);
        return predict(model, vectorize(masked, model.vocabulary)) == full_prediction;
    }
};

std::vector<uint8_t> anchor_bits_for(const InstanceContext& ctx,
                                     const std::vector<std::string>& anchor) {
    std::vector<uint8_t> bits(ctx.M(), 0);
    for (const std::string& token : anchor) {
        const auto it = std::find(ctx.distinct.begin(), ctx.distinct.end(), token);
        if (it == ctx.distinct.end()) {
            throw std::invalid_argument("anchor token \"" + token +
                                        "\" is not a distinct in-vocabulary token of the instance");
        }
        bits[static_cast<size_t>(it - ctx.distinct.begin())] = 1;
    }
    return bits;
}

// Batched estimation with early stopping on the Hoeffding bound.
PrecisionEstimate estimate_with_stream(const InstanceContext& ctx,
                                       const std::vector<uint8_t>& anchor_bits,
                                       const AnchorConfig& cfg, rng::Stream& stream) {
    size_t n = 0, hits = 0;
    PrecisionEstimate result;
    while (n < cfg.max_samples_per_candidate) {
        const size_t batch = std::min(cfg.batch, cfg.max_samples_per_candidate - n);
        for (size_t i = 0; i < batch; ++i) {
            const Mask mask = ctx.draw_conditional(anchor_bits, cfg.keep_prob, stream);
            if (ctx.prediction_holds(mask)) ++hits;
        }
        n += batch;

        const double estimate = static_cast<double>(hits) / static_cast<double>(n);
        const double halfwidth = hoeffding_halfwidth(cfg.delta, n);
        result = {estimate, std::max(0.0, estimate - halfwidth), n};
        if (result.lower_bound >= cfg.tau) break;           // confirmed
        if (estimate + halfwidth < cfg.tau) break;          // hopeless
    }
    return result;
}

// Plain estimate on a fixed budget, used to rank candidate extensions.
double fixed_budget_precision(const InstanceContext& ctx,
                              const std::vector<uint8_t>& anchor_bits,
                              const AnchorConfig& cfg, rng::Stream& stream,
                              size_t& samples_used) {
    size_t hits = 0;
    for (size_t i = 0; i < cfg.batch; ++i) {
        const Mask mask = ctx.draw_conditional(anchor_bits, cfg.keep_prob, stream);
        if (ctx.prediction_holds(mask)) ++hits;
    }
    samples_used += cfg.batch;
    return static_cast<double>(hits) / static_cast<double>(cfg.batch);
}

double empirical_coverage(const InstanceContext& ctx,
                          const std::vector<uint8_t>& anchor_bits, double keep_prob,
                          rng::Stream& stream) {
    constexpr size_t kCoverageSamples = 1024;
    size_t consistent = 0;
    for (size_t i = 0; i < kCoverageSamples; ++i) {
        bool match = true;
        for (size_t j = 0; j < ctx.M(); ++j) {
            const bool active = stream.bernoulli(keep_prob);
            if (anchor_bits[j] != 0 && !active) match = false;
        }
        if (match) ++consistent;
    }
    return static_cast<double>(consistent) / static_cast<double>(kCoverageSamples);
}

} // namespace

double hoeffding_halfwidth(double delta, size_t n) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("delta must lie in (0,1)");
    }
    if (n == 0) throw std::invalid_argument("sample count must be > 0");
    return std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

std::vector<Mask> sample_conditional(const std::vector<std::string>& distinct_tokens,
                                     const std::vector<std::string>& anchor, size_t n,
                                     double keep_prob, rng::Stream& stream) {
    std::vector<uint8_t> bits(distinct_tokens.size(), 0);
    for (const std::string& token : anchor) {
        const auto it = std::find(distinct_tokens.begin(), distinct_tokens.end(), token);
        if (it == distinct_tokens.end()) {
            throw std::invalid_argument("anchor token \"" + token +
                                        "\" is not among the instance tokens");
        }
        bits[static_cast<size_t>(it - distinct_tokens.begin())] = 1;
    }

    std::vector<Mask> masks;
    masks.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        Mask mask(distinct_tokens.size(), 0);
        for (size_t j = 0; j < mask.size(); ++j) {
            mask[j] = bits[j] != 0 || stream.bernoulli(keep_prob) ? 1 : 0;
        }
        masks.push_back(std::move(mask));
    }
    return masks;
}

PrecisionEstimate estimate_precision(const RandomForestModel& model,
                                     const SurveyRecord& record,
                                     const std::vector<std::string>& anchor,
                                     const AnchorConfig& cfg) {
    check_config(cfg);
    InstanceContext ctx(model, record);
    const std::vector<uint8_t> bits = anchor_bits_for(ctx, anchor);

    std::string anchor_tag;
    for (const std::string& t : anchor) {
        anchor_tag += t;
        anchor_tag += ' ';
    }
    rng::Stream stream(rng::derive(cfg.seed, "anchor-precision", record.id, anchor_tag));
    return estimate_with_stream(ctx, bits, cfg, stream);
}

AnchorResult find_anchor(const RandomForestModel& model, const SurveyRecord& record,
                         const AnchorConfig& cfg) {
    check_config(cfg);
    InstanceContext ctx(model, record);
    const size_t M = ctx.M();

    rng::Stream stream(rng::derive(cfg.seed, "anchor", record.id));

    // Candidate order is lexicographic so equal scores resolve to the
    // smallest token.
    std::vector<size_t> candidate_order(M);
    for (size_t j = 0; j < M; ++j) candidate_order[j] = j;
    std::sort(candidate_order.begin(), candidate_order.end(),
              [&](size_t a, size_t b) { return ctx.distinct[a] < ctx.distinct[b]; });

    std::vector<uint8_t> anchor_bits(M, 0);
    std::vector<size_t> anchor_indices;
    size_t samples_used = 0;

    PrecisionEstimate confirmed = estimate_with_stream(ctx, anchor_bits, cfg, stream);
    samples_used += confirmed.samples_used;

    while (confirmed.lower_bound < cfg.tau && anchor_indices.size() < cfg.max_anchor_size &&
           anchor_indices.size() < M) {
        long best_candidate = -1;
        double best_precision = -1.0;
        for (size_t j : candidate_order) {
            if (anchor_bits[j]) continue;
            std::vector<uint8_t> extended = anchor_bits;
            extended[j] = 1;
            const double precision =
                fixed_budget_precision(ctx, extended, cfg, stream, samples_used);
            if (precision > best_precision) {
                best_precision = precision;
                best_candidate = static_cast<long>(j);
            }
        }
        anchor_bits[static_cast<size_t>(best_candidate)] = 1;
        anchor_indices.push_back(static_cast<size_t>(best_candidate));

        confirmed = estimate_with_stream(ctx, anchor_bits, cfg, stream);
        samples_used += confirmed.samples_used;
    }

    AnchorResult result;
    for (size_t j : anchor_indices) result.anchor.push_back(ctx.distinct[j]);
    result.precision_estimate = confirmed.estimate;
    result.precision_lower_bound = confirmed.lower_bound;
    result.converged = confirmed.lower_bound >= cfg.tau;
    result.coverage_estimate = empirical_coverage(ctx, anchor_bits, cfg.keep_prob, stream);
    result.samples_used = samples_used;
    return result;
}

nlohmann::ordered_json anchor_to_json(const AnchorResult& r, std::string_view id) {
    nlohmann::ordered_json j;
    j["method"] = "anchor";
    j["id"] = std::string(id);
    j["anchor"] = r.anchor;
    j["precision"] = r.precision_estimate;
    j["lower_bound"] = r.precision_lower_bound;
    j["coverage"] = r.coverage_estimate;
    j["converged"] = r.converged;
    return j;
}

AnchorResult anchor_from_json(const nlohmann::json& j) {
    AnchorResult r;
    for (const auto& t : j.at("anchor")) r.anchor.push_back(t.get<std::string>());
    r.precision_estimate = j.at("precision").get<double>();
    r.precision_lower_bound = j.at("lower_bound").get<double>();
    r.coverage_estimate = j.at("coverage").get<double>();
    r.converged = j.at("converged").get<bool>();
    return r;
}

} // namespace uxexplain
