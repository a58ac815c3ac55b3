// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uxexplain/anchor.hpp"
#include "uxexplain/augment.hpp"
#include "uxexplain/corpus.hpp"
#include "uxexplain/forest.hpp"
#include "uxexplain/lime.hpp"
#include "uxexplain/report.hpp"
#include "uxexplain/shap.hpp"

namespace uxexplain::pipeline {

/// Single configuration for the whole run. Component seeds are derived
/// from the global seed per dimension, so the run is a pure function of
/// (input files, config).
struct RunConfig {
    uint64_t seed = 1;

    struct Paths {
        std::string corpus;               // empty = use the synthetic generator
        std::string lexicon;              // empty = no synonym lexicon
        std::string out = "out";
    } paths;

    double split_fraction = 0.2;
    size_t min_df = 2;
    size_t synthetic_n_per_dimension = 100;

    AugmentConfig augment;
    ForestConfig forest;
    LimeConfig lime;
    ShapConfig shap;
    AnchorConfig anchor;

    struct Report {
        size_t top_keywords = 10;
        size_t word_cloud_top_n = 30;
    } report;

    /// Directory the config file came from; relative input paths
    /// (corpus, lexicon) resolve against it. The out path resolves
    /// against the working directory.
    std::filesystem::path config_dir = ".";

    static RunConfig load(const std::filesystem::path& path);
    static RunConfig from_json(const nlohmann::json& j,
                               const std::filesystem::path& config_dir);

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    std::filesystem::path out_dir() const { return paths.out; }
    std::optional<std::filesystem::path> corpus_path() const;
    std::optional<std::filesystem::path> lexicon_path() const;
};

struct IngestSummary {
    size_t n_records = 0;
    // dimension key -> {unsatisfied, satisfied} record counts
    std::map<std::string, std::array<size_t, 2>> per_dimension;
};

struct TrainSummary {
    std::vector<std::string> trained_dimensions; // keys, in facet order
    std::vector<std::string> skipped_dimensions;
    std::map<std::string, EvalMetrics> test_metrics;
};

struct ExplainOptions {
    std::string method = "all"; // lime | shap | anchor | all
    std::vector<std::string> ids;
    bool all_test = false; // default when ids is empty
};

struct ExplainSummary {
    size_t n_instances = 0;
    size_t n_skipped = 0; // no in-vocabulary tokens or missing model
    std::vector<std::filesystem::path> files;
};

/// Loads and validates the configured corpus; nothing is written.
IngestSummary cmd_ingest(const RunConfig& cfg, std::ostream& log,
                         const std::optional<std::filesystem::path>& corpus_override = {});

/// Writes <out>/synthetic_corpus.jsonl from (seed, n_per_dimension).
std::filesystem::path cmd_generate(const RunConfig& cfg, std::ostream& log);

/// Splits the source corpus (writing <out>/split/{train,test}.jsonl if
/// missing) and writes the augmented training corpus. Only the training
/// split is ever augmented.
std::filesystem::path cmd_augment(const RunConfig& cfg, std::ostream& log);

/// Trains one model per dimension on the augmented train split and
/// writes models, vocabularies and metrics. A dimension whose training
/// data has a single class is skipped with a warning.
TrainSummary cmd_train(const RunConfig& cfg, std::ostream& log);

/// Explains test instances (or the given ids) with the per-dimension
/// models, writing one JSONL file per dimension and method.
ExplainSummary cmd_explain(const RunConfig& cfg, const ExplainOptions& options,
                           std::ostream& log);

/// Builds one DimensionReport per trained dimension from the model,
/// split and explanation files, rendering JSON and SVG outputs.
std::vector<std::filesystem::path> cmd_report(const RunConfig& cfg, std::ostream& log);

/// The whole pipeline in order: ingest/generate, split + augment,
/// train, explain (all methods, all test instances), report.
void cmd_run_all(const RunConfig& cfg, std::ostream& log);

} // namespace uxexplain::pipeline
