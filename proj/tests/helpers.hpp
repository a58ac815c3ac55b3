// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures for the test suites: throwaway directories, tiny
// corpora, hand-built forests with known behavior, and a trained model
// over the planted-keyword synthetic corpus.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "uxexplain/corpus.hpp"
#include "uxexplain/forest.hpp"
#include "uxexplain/vectorize.hpp"

namespace uxtest {

/// Unique directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& prefix) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               (prefix + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline std::filesystem::path write_file(const std::filesystem::path& path,
                                        const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
    return path;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

inline uxexplain::SurveyRecord record(std::string id, std::string text,
                                      uxexplain::HoneycombDimension dim,
                                      uxexplain::SatisfactionLabel label) {
    return uxexplain::SurveyRecord{std::move(id), std::move(text), dim, label, {}};
}

/// Vocabulary whose tokens are exactly the given ones (each in its own
/// single-token document, so indices are lexicographic).
inline uxexplain::Vocabulary vocab_of(const std::vector<std::string>& tokens) {
    uxexplain::Corpus corpus;
    for (size_t i = 0; i < tokens.size(); ++i) {
        corpus.records.push_back(record("v" + std::to_string(i), tokens[i],
                                        uxexplain::HoneycombDimension::Usability,
                                        uxexplain::SatisfactionLabel::Satisfied));
    }
    return uxexplain::Vocabulary::build(corpus, 1);
}

/// Leaf with class counts approximating p_sat at 1/1000 resolution.
inline uxexplain::TreeNode leaf_with_p_sat(double p_sat) {
    const auto c1 = static_cast<uint32_t>(p_sat * 1000.0 + 0.5);
    return uxexplain::TreeNode{-1, -1, -1, 1000 - c1, c1};
}

/// One-tree forest splitting on a single token: p_sat is p_present when
/// the token is active, p_absent otherwise. Every other feature is a
/// dummy by construction.
inline uxexplain::RandomForestModel single_token_stump(const uxexplain::Vocabulary& vocab,
                                                       const std::string& token,
                                                       double p_present,
                                                       double p_absent) {
    const auto feature = vocab.index_of(token);
    uxexplain::DecisionTree tree;
    tree.nodes.push_back(
        uxexplain::TreeNode{static_cast<int32_t>(*feature), 1, 2, 0, 0});
    tree.nodes.push_back(leaf_with_p_sat(p_absent));
    tree.nodes.push_back(leaf_with_p_sat(p_present));

    uxexplain::RandomForestModel model;
    model.trees.push_back(std::move(tree));
    model.vocabulary = vocab;
    model.config = uxexplain::ForestConfig{1, 1, 1, 1, 0};
    model.metrics = uxexplain::TrainMetrics{0, 0.0};
    return model;
}

/// Forest of one stump per listed token with shared leaf probabilities;
/// the model is symmetric in all of the listed tokens.
inline uxexplain::RandomForestModel symmetric_stumps(const uxexplain::Vocabulary& vocab,
                                                     const std::vector<std::string>& tokens,
                                                     double p_present, double p_absent) {
    uxexplain::RandomForestModel model = single_token_stump(vocab, tokens.at(0),
                                                            p_present, p_absent);
    for (size_t i = 1; i < tokens.size(); ++i) {
        model.trees.push_back(
            single_token_stump(vocab, tokens[i], p_present, p_absent).trees[0]);
    }
    model.config.n_trees = tokens.size();
    return model;
}

/// Shared trained fixture on the planted-keyword synthetic corpus:
/// one model over all dimensions, labels driven by the keyword pools.
struct SyntheticFixture {
    uxexplain::Corpus corpus;
    uxexplain::Corpus train;
    uxexplain::Corpus test;
    uxexplain::Vocabulary vocab;
    uxexplain::RandomForestModel model;
};

inline const SyntheticFixture& synthetic_fixture() {
    static SyntheticFixture fixture = [] {
        SyntheticFixture f;
        f.corpus = uxexplain::generate_synthetic(1, 60);
        auto [train, test] = uxexplain::split_stratified(f.corpus, 0.2, 1);
        f.train = std::move(train);
        f.test = std::move(test);
        f.vocab = uxexplain::Vocabulary::build(f.train, 2);

        std::vector<uxexplain::FeatureVector> X;
        std::vector<uxexplain::SatisfactionLabel> y;
        for (const uxexplain::SurveyRecord& r : f.train.records) {
            X.push_back(uxexplain::vectorize(uxexplain::tokenize(r.text), f.vocab));
            y.push_back(r.label);
        }
        f.model = uxexplain::train_forest(X, y, f.vocab, uxexplain::ForestConfig{
                                                             .n_trees = 100,
                                                             .max_depth = 12,
                                                             .min_samples_leaf = 2,
                                                             .features_per_split = 0,
                                                             .seed = 7,
                                                         });
        return f;
    }();
    return fixture;
}

} // namespace uxtest
