// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "uxexplain/corpus.hpp"
#include "uxexplain/vectorize.hpp"

namespace uxexplain {

struct ForestConfig {
    size_t n_trees = 100;
    size_t max_depth = 12;
    size_t min_samples_leaf = 2;
    size_t features_per_split = 0; // 0 = ceil(sqrt(d)), resolved at train time
    uint64_t seed = 0;
};

/// Flat node array. Internal nodes split on feature absent (left) /
/// present (right); leaves keep training class counts so the tree
/// votes with leaf frequencies.
struct TreeNode {
    int32_t feature = -1; // -1 marks a leaf
    int32_t left = -1;
    int32_t right = -1;
    uint32_t count0 = 0;
    uint32_t count1 = 0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    const TreeNode& leaf_for(const FeatureVector& x) const;
    size_t depth() const;
    bool operator==(const DecisionTree&) const = default;
};

struct TrainMetrics {
    size_t n_samples = 0;
    double train_accuracy = 0.0;
};

/// Immutable trained ensemble. predict_proba is a pure read; sharing
/// across threads is safe.
struct RandomForestModel {
    std::vector<DecisionTree> trees;
    Vocabulary vocabulary;
    ForestConfig config; // features_per_split resolved
    TrainMetrics metrics;
};

/// Trains n_trees trees on bootstrap samples. At each node,
/// features_per_split candidate features are sampled without
/// replacement and the best Gini-impurity-decrease split wins, ties
/// broken by lowest feature index (decrease comparisons are exact
/// integer arithmetic, so ties are well defined). Per-tree RNG streams
/// are keyed by (seed, tree index): any thread count gives bit-identical
/// models. Throws on empty input, size mismatch, or single-class y.
RandomForestModel train_forest(const std::vector<FeatureVector>& X,
                               const std::vector<SatisfactionLabel>& y,
                               const Vocabulary& vocab, const ForestConfig& cfg,
                               size_t n_threads = 0);

/// Mean over trees of leaf class frequencies; components sum to 1.
/// Throws if x.dim does not match the model vocabulary.
struct ClassProbabilities {
    double p_unsat = 0.0;
    double p_sat = 0.0;
};
ClassProbabilities predict_proba(const RandomForestModel& m, const FeatureVector& x);

/// Argmax of predict_proba; an exact tie goes to Unsatisfied.
SatisfactionLabel predict(const RandomForestModel& m, const FeatureVector& x);

struct EvalMetrics {
    size_t n = 0;
    double accuracy = 0.0;
    double precision_satisfied = 0.0;
    double recall_satisfied = 0.0;
    double precision_unsatisfied = 0.0;
    double recall_unsatisfied = 0.0;
    // confusion[actual][predicted], class order Unsatisfied, Satisfied
    std::array<std::array<size_t, 2>, 2> confusion{};

    nlohmann::ordered_json to_json() const;
    static EvalMetrics from_json(const nlohmann::json& j);
};

/// Tokenizes and vectorizes test records with the model vocabulary,
/// then scores predictions. Throws on an empty corpus.
EvalMetrics evaluate(const RandomForestModel& m, const Corpus& test);

/// Versioned JSON model format. The file stores the vocabulary hash,
/// not the vocabulary; load_model verifies the hash against the
/// vocabulary it is given.
void save_model(const RandomForestModel& m, const std::filesystem::path& path);
std::string model_to_json_string(const RandomForestModel& m);
RandomForestModel load_model(const std::filesystem::path& path, const Vocabulary& vocab);

} // namespace uxexplain
