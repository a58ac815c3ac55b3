// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uxexplain/anchor.hpp"
#include "uxexplain/corpus.hpp"
#include "uxexplain/forest.hpp"
#include "uxexplain/lime.hpp"
#include "uxexplain/shap.hpp"

namespace uxexplain {

enum class ClassTag { Satisfied, Unsatisfied, Both };

std::string_view to_string(ClassTag tag);
ClassTag parse_class_tag(std::string_view s);

struct WordCloudDatum {
    std::string token;
    double weight = 0.0; // document frequency or mean |phi|, never negative
    ClassTag tag = ClassTag::Both;
};

/// Frequency mode: weights are document frequencies within the
/// dimension; the tag records which label classes contain the token.
/// Empty when the corpus has no record of the dimension.
std::vector<WordCloudDatum> word_cloud_frequency(const Corpus& corpus,
                                                 HoneycombDimension dimension,
                                                 size_t top_n);

/// SHAP mode: weights are mean |phi| over the explanations; the tag
/// follows the sign of the mean phi.
std::vector<WordCloudDatum> word_cloud_shap(const std::vector<ShapExplanation>& explanations,
                                            size_t top_n);

/// One (phi, fx) pair per explanation whose instance contains the
/// token, in input order.
std::vector<std::pair<double, double>> shap_distribution(
    std::string_view token, const std::vector<ShapExplanation>& explanations);

/// LIME and Anchor detail for one highlighted instance.
struct SampleExplanation {
    std::string id;
    double p_sat = 0.0;
    LimeExplanation lime;
    AnchorResult anchor;
};

/// Everything the per-dimension output bundles: metrics, ranked
/// keywords, both word-cloud modes, per-word SHAP distributions, and
/// the most-confident positive/negative sample explanations.
struct DimensionReport {
    HoneycombDimension dimension{};
    EvalMetrics metrics;
    std::vector<TokenShapStats> keywords; // ranked by mean |phi|
    std::vector<WordCloudDatum> cloud_frequency;
    std::vector<WordCloudDatum> cloud_shap;
    std::map<std::string, std::vector<std::pair<double, double>>> distributions;
    std::optional<SampleExplanation> sample_positive;
    std::optional<SampleExplanation> sample_negative;
};

nlohmann::ordered_json report_to_json(const DimensionReport& report);
DimensionReport report_from_json(const nlohmann::json& j);

/// Deterministic grid-layout word cloud: one <text> element per datum,
/// row-major by rank, font size linear in weight between 12 and 48.
std::string word_cloud_svg(const std::vector<WordCloudDatum>& data);

struct RenderFormats {
    bool json = true;
    bool svg = true;
};

/// Writes <dim>.report.json plus one SVG per non-empty cloud mode into
/// out_dir. Pure function of the report content; rendering the same
/// report twice produces byte-identical files.
std::vector<std::filesystem::path> render_report(const DimensionReport& report,
                                                 const std::filesystem::path& out_dir,
                                                 RenderFormats formats = {});

} // namespace uxexplain
