// SPDX-License-Identifier: Apache-2.0
#include "uxexplain/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "uxexplain/rng.hpp"

namespace uxexplain {

namespace {

using i128 = __int128;

// Dense row-major presence matrix; node evaluation scans sample rows.
struct DenseFeatures {
    std::vector<uint8_t> cells;
    size_t d = 0;

    uint8_t at(size_t sample, size_t feature) const { return cells[sample * d + feature]; }
};

struct TreeBuilder {
    const DenseFeatures& features;
    const std::vector<SatisfactionLabel>& y;
    const ForestConfig& cfg;
    rng::Stream& stream;
    std::vector<TreeNode> nodes;

    uint32_t count_sat(const std::vector<uint32_t>& samples) const {
        uint32_t c1 = 0;
        for (uint32_t s : samples) c1 += y[s] == SatisfactionLabel::Satisfied ? 1u : 0u;
        return c1;
    }

    int32_t build(const std::vector<uint32_t>& samples, size_t depth) {
        const auto n = static_cast<uint32_t>(samples.size());
        const uint32_t c1 = count_sat(samples);
        const uint32_t c0 = n - c1;

        const auto node_index = static_cast<int32_t>(nodes.size());
        nodes.emplace_back();

        const bool pure = c0 == 0 || c1 == 0;
        if (pure || depth >= cfg.max_depth || n < 2 * cfg.min_samples_leaf) {
            nodes[node_index] = TreeNode{-1, -1, -1, c0, c1};
            return node_index;
        }

        // Candidate features, ascending so the lowest index wins exact ties.
        std::vector<size_t> candidates =
            stream.sample_indices(features.d, cfg.features_per_split);
        std::sort(candidates.begin(), candidates.end());

        // A split improves Gini impurity iff xL/nL + xR/nR > x_parent/n,
        // with x = c0^2 + c1^2 per side; compared as exact fractions.
        const i128 x_parent = i128(c0) * c0 + i128(c1) * c1;
        int64_t best_feature = -1;
        i128 best_num = 0, best_den = 1;

        for (size_t f : candidates) {
            uint32_t n_right = 0, c1_right = 0;
            for (uint32_t s : samples) {
                if (features.at(s, f)) {
                    ++n_right;
                    c1_right += y[s] == SatisfactionLabel::Satisfied ? 1u : 0u;
                }
            }
            const uint32_t n_left = n - n_right;
            if (n_left < cfg.min_samples_leaf || n_right < cfg.min_samples_leaf) continue;

            const uint32_t c1_left = c1 - c1_right;
            const uint32_t c0_right = n_right - c1_right;
            const uint32_t c0_left = n_left - c1_left;
            const i128 x_left = i128(c0_left) * c0_left + i128(c1_left) * c1_left;
            const i128 x_right = i128(c0_right) * c0_right + i128(c1_right) * c1_right;

            const i128 num = x_left * n_right + x_right * n_left;
            const i128 den = i128(n_left) * n_right;
            if (num * n <= x_parent * den) continue; // no impurity decrease
            if (best_feature >= 0 && num * best_den <= best_num * den) continue;
            best_feature = static_cast<int64_t>(f);
            best_num = num;
            best_den = den;
        }

        if (best_feature < 0) {
            nodes[node_index] = TreeNode{-1, -1, -1, c0, c1};
            return node_index;
        }

        std::vector<uint32_t> left, right;
        for (uint32_t s : samples) {
            (features.at(s, static_cast<size_t>(best_feature)) ? right : left).push_back(s);
        }
        const int32_t left_index = build(left, depth + 1);
        const int32_t right_index = build(right, depth + 1);
        nodes[node_index] =
            TreeNode{static_cast<int32_t>(best_feature), left_index, right_index, 0, 0};
        return node_index;
    }
};

DecisionTree train_tree(const DenseFeatures& features,
                        const std::vector<SatisfactionLabel>& y, const ForestConfig& cfg,
                        uint64_t tree_seed) {
    rng::Stream stream(tree_seed);
    const size_t n = y.size();

    std::vector<uint32_t> bootstrap(n);
    for (uint32_t& s : bootstrap) s = static_cast<uint32_t>(stream.index(n));

    TreeBuilder builder{features, y, cfg, stream, {}};
    builder.build(bootstrap, 0);
    return DecisionTree{std::move(builder.nodes)};
}

double leaf_p_sat(const TreeNode& leaf) {
    return static_cast<double>(leaf.count1) /
           static_cast<double>(leaf.count0 + leaf.count1);
}

} // namespace

const TreeNode& DecisionTree::leaf_for(const FeatureVector& x) const {
    const TreeNode* node = &nodes[0];
    while (!node->is_leaf()) {
        const bool present = x.contains(static_cast<uint32_t>(node->feature));
        node = &nodes[static_cast<size_t>(present ? node->right : node->left)];
    }
    return *node;
}

size_t DecisionTree::depth() const {
    // iterative depth over the flat array
    std::vector<std::pair<size_t, size_t>> stack{{0, 0}};
    size_t max_depth = 0;
    while (!stack.empty()) {
        auto [index, depth] = stack.back();
        stack.pop_back();
        const TreeNode& node = nodes[index];
        if (node.is_leaf()) {
            max_depth = std::max(max_depth, depth);
        } else {
            stack.emplace_back(static_cast<size_t>(node.left), depth + 1);
            stack.emplace_back(static_cast<size_t>(node.right), depth + 1);
        }
    }
    return max_depth;
}

RandomForestModel train_forest(const std::vector<FeatureVector>& X,
                               const std::vector<SatisfactionLabel>& y,
                               const Vocabulary& vocab, const ForestConfig& cfg,
                               size_t n_threads) {
    if (X.size() != y.size()) {
        throw std::invalid_argument("feature/label count mismatch: " +
                                    std::to_string(X.size()) + " vs " +
                                    std::to_string(y.size()));
    }
    if (X.size() < 2) {
        throw std::invalid_argument("need at least 2 training samples, got " +
                                    std::to_string(X.size()));
    }
    const size_t n_sat = static_cast<size_t>(
        std::count(y.begin(), y.end(), SatisfactionLabel::Satisfied));
    if (n_sat == 0 || n_sat == y.size()) {
        throw std::invalid_argument("training labels contain a single class");
    }
    if (cfg.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
    if (cfg.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
    if (cfg.min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");

    const size_t d = vocab.size();
    ForestConfig resolved = cfg;
    if (resolved.features_per_split == 0) {
        resolved.features_per_split =
            static_cast<size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    }
    if (resolved.features_per_split < 1 || resolved.features_per_split > d) {
        throw std::invalid_argument("features_per_split must lie in [1, " +
                                    std::to_string(d) + "], got " +
                                    std::to_string(resolved.features_per_split));
    }

    DenseFeatures features;
    features.d = d;
    features.cells.assign(X.size() * d, 0);
    for (size_t i = 0; i < X.size(); ++i) {
        if (X[i].dim != d) {
            throw std::invalid_argument("sample " + std::to_string(i) + " has dimension " +
                                        std::to_string(X[i].dim) + ", vocabulary has " +
                                        std::to_string(d));
        }
        for (uint32_t f : X[i].active) features.cells[i * d + f] = 1;
    }

    RandomForestModel model;
    model.vocabulary = vocab;
    model.config = resolved;
    model.trees.resize(resolved.n_trees);

    size_t workers = n_threads != 0 ? n_threads : std::thread::hardware_concurrency();
    workers = std::clamp<size_t>(workers, 1, resolved.n_trees);

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const size_t t = next.fetch_add(1);
            if (t >= resolved.n_trees) break;
            model.trees[t] = train_tree(features, y, resolved,
                                        rng::derive(resolved.seed, "tree",
                                                    std::to_string(t)));
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    size_t correct = 0;
    for (size_t i = 0; i < X.size(); ++i) {
        if (predict(model, X[i]) == y[i]) ++correct;
    }
    model.metrics = TrainMetrics{X.size(),
                                 static_cast<double>(correct) / static_cast<double>(X.size())};
    return model;
}

ClassProbabilities predict_proba(const RandomForestModel& m, const FeatureVector& x) {
    if (x.dim != m.vocabulary.size()) {
        throw std::invalid_argument("feature vector dimension " + std::to_string(x.dim) +
                                    " does not match model dimension " +
                                    std::to_string(m.vocabulary.size()));
    }
    double p_sat = 0.0, p_unsat = 0.0;
    for (const DecisionTree& tree : m.trees) {
        const TreeNode& leaf = tree.leaf_for(x);
        p_sat += leaf_p_sat(leaf);
        p_unsat += 1.0 - leaf_p_sat(leaf);
    }
    const auto n = static_cast<double>(m.trees.size());
    return {p_unsat / n, p_sat / n};
}

SatisfactionLabel predict(const RandomForestModel& m, const FeatureVector& x) {
    const ClassProbabilities p = predict_proba(m, x);
    return p.p_sat > p.p_unsat ? SatisfactionLabel::Satisfied
                               : SatisfactionLabel::Unsatisfied;
}

nlohmann::ordered_json EvalMetrics::to_json() const {
    nlohmann::ordered_json j;
    j["n"] = n;
    j["accuracy"] = accuracy;
    j["precision_satisfied"] = precision_satisfied;
    j["recall_satisfied"] = recall_satisfied;
    j["precision_unsatisfied"] = precision_unsatisfied;
    j["recall_unsatisfied"] = recall_unsatisfied;
    j["confusion"] = {{confusion[0][0], confusion[0][1]},
                      {confusion[1][0], confusion[1][1]}};
    return j;
}

EvalMetrics EvalMetrics::from_json(const nlohmann::json& j) {
    EvalMetrics m;
    m.n = j.at("n").get<size_t>();
    m.accuracy = j.at("accuracy").get<double>();
    m.precision_satisfied = j.at("precision_satisfied").get<double>();
    m.recall_satisfied = j.at("recall_satisfied").get<double>();
    m.precision_unsatisfied = j.at("precision_unsatisfied").get<double>();
    m.recall_unsatisfied = j.at("recall_unsatisfied").get<double>();
    for (size_t a = 0; a < 2; ++a) {
        for (size_t p = 0; p < 2; ++p) m.confusion[a][p] = j.at("confusion")[a][p].get<size_t>();
    }
    return m;
}

EvalMetrics evaluate(const RandomForestModel& m, const Corpus& test) {
    if (test.empty()) throw std::invalid_argument("test corpus is empty");

    EvalMetrics metrics;
    metrics.n = test.size();
    for (const SurveyRecord& r : test.records) {
        const FeatureVector x = vectorize(tokenize(r.text), m.vocabulary);
        const SatisfactionLabel got = predict(m, x);
        metrics.confusion[static_cast<size_t>(r.label)][static_cast<size_t>(got)] += 1;
    }

    const auto& c = metrics.confusion;
    const double correct = static_cast<double>(c[0][0] + c[1][1]);
    metrics.accuracy = correct / static_cast<double>(metrics.n);

    const auto ratio = [](size_t num, size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    metrics.precision_satisfied = ratio(c[1][1], c[0][1] + c[1][1]);
    metrics.recall_satisfied = ratio(c[1][1], c[1][0] + c[1][1]);
    metrics.precision_unsatisfied = ratio(c[0][0], c[0][0] + c[1][0]);
    metrics.recall_unsatisfied = ratio(c[0][0], c[0][0] + c[0][1]);
    return metrics;
}

namespace {

constexpr int kModelFormatVersion = 1;

char hex_digit(uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

std::string hash_hex(uint64_t h) {
    std::string s(16, '0');
    for (size_t i = 0; i < 16; ++i) s[15 - i] = hex_digit(h >> (4 * i));
    return s;
}

} // namespace

std::string model_to_json_string(const RandomForestModel& m) {
    nlohmann::ordered_json j;
    j["version"] = kModelFormatVersion;
    j["config"] = {{"n_trees", m.config.n_trees},
                   {"max_depth", m.config.max_depth},
                   {"min_samples_leaf", m.config.min_samples_leaf},
                   {"features_per_split", m.config.features_per_split},
                   {"seed", m.config.seed}};
    j["vocab_hash"] = hash_hex(m.vocabulary.content_hash());
    j["dimension"] = m.vocabulary.size();
    j["metrics"] = {{"n_samples", m.metrics.n_samples},
                    {"train_accuracy", m.metrics.train_accuracy}};

    nlohmann::ordered_json trees = nlohmann::ordered_json::array();
    for (const DecisionTree& tree : m.trees) {
        nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
        for (const TreeNode& node : tree.nodes) {
            if (node.is_leaf()) {
                nodes.push_back({-1, node.count0, node.count1});
            } else {
                nodes.push_back({node.feature, node.left, node.right});
            }
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j.dump();
}

void save_model(const RandomForestModel& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file " + path.string());
    out << model_to_json_string(m) << '\n';
    if (!out) throw std::runtime_error("write failed for model file " + path.string());
}

RandomForestModel load_model(const std::filesystem::path& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("malformed model file " + path.string() + ": " + e.what());
    }

    if (j.at("version").get<int>() != kModelFormatVersion) {
        throw std::runtime_error("unsupported model format version in " + path.string());
    }
    if (j.at("vocab_hash").get<std::string>() != hash_hex(vocab.content_hash())) {
        throw std::runtime_error("vocabulary hash mismatch for model file " + path.string());
    }
    if (j.at("dimension").get<size_t>() != vocab.size()) {
        throw std::runtime_error("vocabulary size mismatch for model file " + path.string());
    }

    RandomForestModel m;
    m.vocabulary = vocab;
    const auto& cfg = j.at("config");
    m.config.n_trees = cfg.at("n_trees").get<size_t>();
    m.config.max_depth = cfg.at("max_depth").get<size_t>();
    m.config.min_samples_leaf = cfg.at("min_samples_leaf").get<size_t>();
    m.config.features_per_split = cfg.at("features_per_split").get<size_t>();
    m.config.seed = cfg.at("seed").get<uint64_t>();
    m.metrics.n_samples = j.at("metrics").at("n_samples").get<size_t>();
    m.metrics.train_accuracy = j.at("metrics").at("train_accuracy").get<double>();

    for (const auto& tree_json : j.at("trees")) {
        DecisionTree tree;
        for (const auto& node_json : tree_json) {
            const auto a = node_json.at(0).get<int64_t>();
            if (a < 0) {
                tree.nodes.push_back(TreeNode{-1, -1, -1,
                                              node_json.at(1).get<uint32_t>(),
                                              node_json.at(2).get<uint32_t>()});
            } else {
                tree.nodes.push_back(TreeNode{static_cast<int32_t>(a),
                                              node_json.at(1).get<int32_t>(),
                                              node_json.at(2).get<int32_t>(), 0, 0});
            }
        }
        if (tree.nodes.empty()) {
            throw std::runtime_error("model file " + path.string() + " contains an empty tree");
        }
        m.trees.push_back(std::move(tree));
    }
    if (m.trees.empty()) {
        throw std::runtime_error("model file " + path.string() + " contains no trees");
    }
    return m;
}

} // namespace uxexplain
