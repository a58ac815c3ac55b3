// SPDX-License-Identifier: Apache-2.0
#include "uxexplain/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "uxexplain/rng.hpp"

namespace uxexplain::pipeline {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// --- config parsing -------------------------------------------------------

void check_keys(const json& obj, std::initializer_list<std::string_view> known,
                const std::string& scope) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw std::invalid_argument("unknown config field \"" + scope + key + "\"");
        }
    }
}

double get_number(const json& obj, const char* key, double fallback,
                  const std::string& scope) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) {
        throw std::invalid_argument("config field \"" + scope + key +
                                    "\" must be a number");
    }
    return obj[key].get<double>();
}

size_t get_count(const json& obj, const char* key, size_t fallback,
                 const std::string& scope) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer() || obj[key].get<int64_t>() < 0) {
        throw std::invalid_argument("config field \"" + scope + key +
                                    "\" must be a non-negative integer");
    }
    return obj[key].get<size_t>();
}

std::string get_string(const json& obj, const char* key, std::string fallback,
                       const std::string& scope) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) {
        throw std::invalid_argument("config field \"" + scope + key +
                                    "\" must be a string");
    }
    return obj[key].get<std::string>();
}

// --- file plumbing ---------------------------------------------------------

std::filesystem::path resolve_input(const std::filesystem::path& config_dir,
                                    const std::string& path) {
    const std::filesystem::path p(path);
    return p.is_absolute() ? p : config_dir / p;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create directory " + dir.string() + ": " +
                                 ec.message());
    }
}

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<ordered_json>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const ordered_json& line : lines) out << line.dump() << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<ordered_json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<ordered_json> lines;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            lines.push_back(ordered_json::parse(line));
        } catch (const json::parse_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": malformed JSON: " + e.what());
        }
    }
    return lines;
}

// --- layout ----------------------------------------------------------------

struct Layout {
    std::filesystem::path out;

    std::filesystem::path synthetic() const { return out / "synthetic_corpus.jsonl"; }
    std::filesystem::path train() const { return out / "split" / "train.jsonl"; }
    std::filesystem::path test() const { return out / "split" / "test.jsonl"; }
    std::filesystem::path train_augmented() const {
        return out / "split" / "train_augmented.jsonl";
    }
    std::filesystem::path model(const std::string& key) const {
        return out / "models" / (key + ".model.json");
    }
    std::filesystem::path vocab(const std::string& key) const {
        return out / "models" / (key + ".vocab.json");
    }
    std::filesystem::path metrics() const { return out / "models" / "metrics.json"; }
    std::filesystem::path explanation(const std::string& key,
                                      const std::string& method) const {
        return out / "explanations" / (key + "." + method + ".jsonl");
    }
    std::filesystem::path reports() const { return out / "reports"; }
};

Layout layout_for(const RunConfig& cfg) { return Layout{cfg.out_dir()}; }

// --- derived per-dimension configs ------------------------------------------

AugmentConfig augment_for(const RunConfig& cfg) {
    AugmentConfig a = cfg.augment;
    a.seed = rng::derive(cfg.seed, "augment");
    return a;
}

ForestConfig forest_for(const RunConfig& cfg, const std::string& key) {
    ForestConfig f = cfg.forest;
    f.seed = rng::derive(cfg.seed, "forest", key);
    return f;
}

LimeConfig lime_for(const RunConfig& cfg, const std::string& key) {
    LimeConfig l = cfg.lime;
    l.seed = rng::derive(cfg.seed, "lime", key);
    return l;
}

ShapConfig shap_for(const RunConfig& cfg, const std::string& key) {
    ShapConfig s = cfg.shap;
    s.seed = rng::derive(cfg.seed, "shap", key);
    return s;
}

AnchorConfig anchor_for(const RunConfig& cfg, const std::string& key) {
    AnchorConfig a = cfg.anchor;
    a.seed = rng::derive(cfg.seed, "anchor", key);
    return a;
}

// --- stage helpers -----------------------------------------------------------

std::filesystem::path source_corpus_file(const RunConfig& cfg, std::ostream& log) {
    if (const auto configured = cfg.corpus_path()) return *configured;
    const Layout layout = layout_for(cfg);
    if (!std::filesystem::exists(layout.synthetic())) {
        ensure_dir(layout.out);
        log << "generating synthetic corpus (seed=" << cfg.seed
            << ", n_per_dimension=" << cfg.synthetic_n_per_dimension << ")\n";
        save_corpus(generate_synthetic(cfg.seed, cfg.synthetic_n_per_dimension),
                    layout.synthetic());
    }
    return layout.synthetic();
}

void ensure_split_files(const RunConfig& cfg, std::ostream& log) {
    const Layout layout = layout_for(cfg);
    if (std::filesystem::exists(layout.train()) &&
        std::filesystem::exists(layout.test())) {
        return;
    }
    const Corpus corpus = load_corpus(source_corpus_file(cfg, log));
    validate_corpus(corpus);

    // Dimensions with a single label class cannot be stratified; they
    // are set aside into the train file and skipped downstream.
    Corpus splittable, leftover;
    for (HoneycombDimension dim : kAllDimensions) {
        std::array<size_t, 2> counts{0, 0};
        for (const SurveyRecord& r : corpus.records) {
            if (r.dimension == dim) ++counts[static_cast<size_t>(r.label)];
        }
        const bool ok = counts[0] >= 2 && counts[1] >= 2;
        if (!ok && counts[0] + counts[1] > 0) {
            log << "warning: dimension " << to_string(dim)
                << " lacks two records per class; it will be skipped\n";
        }
        for (const SurveyRecord& r : corpus.records) {
            if (r.dimension == dim) (ok ? splittable : leftover).records.push_back(r);
        }
    }
    if (splittable.empty()) {
        throw std::runtime_error("no dimension has enough records in both classes");
    }

    auto [train, test] = split_stratified(splittable, cfg.split_fraction, cfg.seed);
    for (SurveyRecord& r : leftover.records) train.records.push_back(std::move(r));

    ensure_dir(layout.train().parent_path());
    save_corpus(train, layout.train());
    save_corpus(test, layout.test());
    log << "split: " << train.size() << " train / " << test.size() << " test records\n";
}

SynonymLexicon lexicon_for(const RunConfig& cfg) {
    if (const auto path = cfg.lexicon_path()) return load_lexicon(*path);
    return {};
}

Corpus records_of(const Corpus& corpus, HoneycombDimension dim) {
    Corpus out;
    for (const SurveyRecord& r : corpus.records) {
        if (r.dimension == dim) out.records.push_back(r);
    }
    return out;
}

bool has_both_classes(const Corpus& corpus) {
    bool sat = false, unsat = false;
    for (const SurveyRecord& r : corpus.records) {
        (r.label == SatisfactionLabel::Satisfied ? sat : unsat) = true;
    }
    return sat && unsat;
}

TrainSummary read_train_summary(const Layout& layout) {
    TrainSummary summary;
    const auto lines = read_jsonl(layout.metrics());
    if (lines.size() != 1) {
        throw std::runtime_error("malformed metrics file " + layout.metrics().string());
    }
    const ordered_json& j = lines[0];
    for (const auto& [key, metrics] : j.at("dimensions").items()) {
        summary.trained_dimensions.push_back(key);
        summary.test_metrics[key] = EvalMetrics::from_json(metrics.at("test"));
    }
    for (const auto& key : j.at("skipped")) {
        summary.skipped_dimensions.push_back(key.get<std::string>());
    }
    return summary;
}

TrainSummary ensure_models(const RunConfig& cfg, std::ostream& log) {
    const Layout layout = layout_for(cfg);
    if (std::filesystem::exists(layout.metrics())) return read_train_summary(layout);
    return cmd_train(cfg, log);
}

void ensure_explanations(const RunConfig& cfg, const TrainSummary& models,
                         std::ostream& log) {
    const Layout layout = layout_for(cfg);
    bool complete = true;
    for (const std::string& key : models.trained_dimensions) {
        for (const char* method : {"lime", "shap", "anchor"}) {
            if (!std::filesystem::exists(layout.explanation(key, method))) {
                complete = false;
            }
        }
    }
    if (!complete) {
        ExplainOptions options;
        options.method = "all";
        options.all_test = true;
        cmd_explain(cfg, options, log);
    }
}

struct LoadedModel {
    Vocabulary vocab;
    RandomForestModel model;
};

LoadedModel load_dimension_model(const Layout& layout, const std::string& key) {
    const auto vocab_lines = read_jsonl(layout.vocab(key));
    if (vocab_lines.size() != 1) {
        throw std::runtime_error("malformed vocabulary file " + layout.vocab(key).string());
    }
    LoadedModel loaded;
    loaded.vocab = Vocabulary::from_json(vocab_lines[0]);
    loaded.model = load_model(layout.model(key), loaded.vocab);
    return loaded;
}

} // namespace

// --- RunConfig ---------------------------------------------------------------

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("malformed config file " + path.string() + ": " +
                                 e.what());
    }
    const std::filesystem::path dir = path.has_parent_path()
                                          ? path.parent_path()
                                          : std::filesystem::path(".");
    return from_json(j, dir);
}

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& config_dir) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    check_keys(j,
               {"seed", "paths", "split_fraction", "min_df", "synthetic", "augment",
                "forest", "lime", "shap", "anchor", "report"},
               "");

    RunConfig cfg;
    cfg.config_dir = config_dir;
    cfg.seed = get_count(j, "seed", 1, "");

    if (j.contains("paths")) {
        const json& p = j["paths"];
        check_keys(p, {"corpus", "lexicon", "out"}, "paths.");
        cfg.paths.corpus = get_string(p, "corpus", "", "paths.");
        cfg.paths.lexicon = get_string(p, "lexicon", "", "paths.");
        cfg.paths.out = get_string(p, "out", "out", "paths.");
    }

    cfg.split_fraction = get_number(j, "split_fraction", 0.2, "");
    cfg.min_df = get_count(j, "min_df", 2, "");

    if (j.contains("synthetic")) {
        const json& s = j["synthetic"];
        check_keys(s, {"n_per_dimension"}, "synthetic.");
        cfg.synthetic_n_per_dimension = get_count(s, "n_per_dimension", 100, "synthetic.");
    }

    if (j.contains("augment")) {
        const json& a = j["augment"];
        check_keys(a,
                   {"n_synonym_ops", "n_insert_ops", "n_swap_ops", "p_delete",
                    "variants_per_method"},
                   "augment.");
        cfg.augment.n_synonym_ops = get_count(a, "n_synonym_ops", 1, "augment.");
        cfg.augment.n_insert_ops = get_count(a, "n_insert_ops", 1, "augment.");
        cfg.augment.n_swap_ops = get_count(a, "n_swap_ops", 1, "augment.");
        cfg.augment.p_delete = get_number(a, "p_delete", 0.1, "augment.");
        cfg.augment.variants_per_method = get_count(a, "variants_per_method", 1, "augment.");
    }

    if (j.contains("forest")) {
        const json& f = j["forest"];
        check_keys(f, {"n_trees", "max_depth", "min_samples_leaf", "features_per_split"},
                   "forest.");
        cfg.forest.n_trees = get_count(f, "n_trees", 100, "forest.");
        cfg.forest.max_depth = get_count(f, "max_depth", 12, "forest.");
        cfg.forest.min_samples_leaf = get_count(f, "min_samples_leaf", 2, "forest.");
        cfg.forest.features_per_split = get_count(f, "features_per_split", 0, "forest.");
    }

    if (j.contains("lime")) {
        const json& l = j["lime"];
        check_keys(l, {"n_samples", "top_k", "ridge_lambda", "sigma"}, "lime.");
        cfg.lime.n_samples = get_count(l, "n_samples", 5000, "lime.");
        cfg.lime.top_k = get_count(l, "top_k", 10, "lime.");
        cfg.lime.ridge_lambda = get_number(l, "ridge_lambda", 1.0, "lime.");
        cfg.lime.kernel.sigma = get_number(l, "sigma", 25.0, "lime.");
    }

    if (j.contains("shap")) {
        const json& s = j["shap"];
        check_keys(s, {"exact_limit", "n_coalitions"}, "shap.");
        cfg.shap.exact_limit = get_count(s, "exact_limit", 12, "shap.");
        cfg.shap.n_coalitions = get_count(s, "n_coalitions", 4096, "shap.");
    }

    if (j.contains("anchor")) {
        const json& a = j["anchor"];
        check_keys(a,
                   {"tau", "delta", "batch", "max_samples_per_candidate",
                    "max_anchor_size", "keep_prob"},
                   "anchor.");
        cfg.anchor.tau = get_number(a, "tau", 0.95, "anchor.");
        cfg.anchor.delta = get_number(a, "delta", 0.05, "anchor.");
        cfg.anchor.batch = get_count(a, "batch", 100, "anchor.");
        cfg.anchor.max_samples_per_candidate =
            get_count(a, "max_samples_per_candidate", 10000, "anchor.");
        cfg.anchor.max_anchor_size = get_count(a, "max_anchor_size", 4, "anchor.");
        cfg.anchor.keep_prob = get_number(a, "keep_prob", 0.5, "anchor.");
    }

    if (j.contains("report")) {
        const json& r = j["report"];
        check_keys(r, {"top_keywords", "word_cloud_top_n"}, "report.");
        cfg.report.top_keywords = get_count(r, "top_keywords", 10, "report.");
        cfg.report.word_cloud_top_n = get_count(r, "word_cloud_top_n", 30, "report.");
    }

    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    const auto fail = [](const std::string& message) {
        throw std::invalid_argument("config error: " + message);
    };

    if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
        fail("split_fraction must lie in (0,1), got " + std::to_string(split_fraction));
    }
    if (min_df < 1) fail("min_df must be >= 1");
    if (synthetic_n_per_dimension < 2) fail("synthetic.n_per_dimension must be >= 2");
    if (!(augment.p_delete >= 0.0 && augment.p_delete <= 1.0)) {
        fail("augment.p_delete must lie in [0,1], got " + std::to_string(augment.p_delete));
    }
    if (forest.n_trees < 1) fail("forest.n_trees must be >= 1");
    if (forest.max_depth < 1) fail("forest.max_depth must be >= 1");
    if (forest.min_samples_leaf < 1) fail("forest.min_samples_leaf must be >= 1");
    if (lime.n_samples < 10) fail("lime.n_samples must be >= 10");
    if (lime.top_k < 1) fail("lime.top_k must be >= 1");
    if (lime.ridge_lambda < 0.0) fail("lime.ridge_lambda must be >= 0");
    if (!(lime.kernel.sigma > 0.0)) fail("lime.sigma must be > 0");
    if (shap.exact_limit < 1) fail("shap.exact_limit must be >= 1");
    if (shap.n_coalitions < 4) fail("shap.n_coalitions must be >= 4");
    if (!(anchor.tau > 0.0 && anchor.tau <= 1.0)) {
        fail("anchor.tau must lie in (0,1], got " + std::to_string(anchor.tau));
    }
    if (!(anchor.delta > 0.0 && anchor.delta < 1.0)) {
        fail("anchor.delta must lie in (0,1), got " + std::to_string(anchor.delta));
    }
    if (anchor.batch < 1) fail("anchor.batch must be >= 1");
    if (!(anchor.keep_prob >= 0.0 && anchor.keep_prob <= 1.0)) {
        fail("anchor.keep_prob must lie in [0,1], got " + std::to_string(anchor.keep_prob));
    }
    if (report.top_keywords < 1) fail("report.top_keywords must be >= 1");
    if (report.word_cloud_top_n < 1) fail("report.word_cloud_top_n must be >= 1");
}

std::optional<std::filesystem::path> RunConfig::corpus_path() const {
    if (paths.corpus.empty()) return std::nullopt;
    return resolve_input(config_dir, paths.corpus);
}

std::optional<std::filesystem::path> RunConfig::lexicon_path() const {
    if (paths.lexicon.empty()) return std::nullopt;
    return resolve_input(config_dir, paths.lexicon);
}

// --- commands ----------------------------------------------------------------

IngestSummary cmd_ingest(const RunConfig& cfg, std::ostream& log,
                         const std::optional<std::filesystem::path>& corpus_override) {
    std::filesystem::path path;
    if (corpus_override) {
        path = *corpus_override;
    } else if (const auto configured = cfg.corpus_path()) {
        path = *configured;
    } else {
        path = layout_for(cfg).synthetic();
        if (!std::filesystem::exists(path)) {
            throw std::runtime_error(
                "no corpus to ingest: set paths.corpus or run `generate` first");
        }
    }

    const Corpus corpus = load_corpus(path);
    validate_corpus(corpus);

    IngestSummary summary;
    summary.n_records = corpus.size();
    for (const SurveyRecord& r : corpus.records) {
        summary.per_dimension[dimension_key(r.dimension)]
                             [static_cast<size_t>(r.label)] += 1;
    }

    log << "ingested " << summary.n_records << " records from " << path.string() << "\n";
    for (const auto& [key, counts] : summary.per_dimension) {
        log << "  " << key << ": " << (counts[0] + counts[1]) << " records ("
            << counts[1] << " satisfied / " << counts[0] << " unsatisfied)\n";
    }
    return summary;
}

std::filesystem::path cmd_generate(const RunConfig& cfg, std::ostream& log) {
    const Layout layout = layout_for(cfg);
    ensure_dir(layout.out);
    const Corpus corpus = generate_synthetic(cfg.seed, cfg.synthetic_n_per_dimension);
    save_corpus(corpus, layout.synthetic());
    log << "wrote " << corpus.size() << " synthetic records to "
        << layout.synthetic().string() << "\n";
    return layout.synthetic();
}

std::filesystem::path cmd_augment(const RunConfig& cfg, std::ostream& log) {
    const Layout layout = layout_for(cfg);
    ensure_split_files(cfg, log);

    const Corpus train = load_corpus(layout.train());
    const SynonymLexicon lexicon = lexicon_for(cfg);
    const Corpus augmented = augment_corpus(train, lexicon, augment_for(cfg));
    save_corpus(augmented, layout.train_augmented());
    log << "augmented train split: " << train.size() << " -> " << augmented.size()
        << " records\n";
    return layout.train_augmented();
}

TrainSummary cmd_train(const RunConfig& cfg, std::ostream& log) {
    const Layout layout = layout_for(cfg);
    ensure_split_files(cfg, log);
    if (!std::filesystem::exists(layout.train_augmented())) cmd_augment(cfg, log);

    const Corpus train = load_corpus(layout.train_augmented());
    const Corpus test = load_corpus(layout.test());
    ensure_dir(layout.metrics().parent_path());

    TrainSummary summary;
    ordered_json metrics_json;
    metrics_json["version"] = 1;
    metrics_json["seed"] = cfg.seed;
    metrics_json["dimensions"] = ordered_json::object();
    metrics_json["skipped"] = ordered_json::array();

    for (HoneycombDimension dim : kAllDimensions) {
        const std::string key = dimension_key(dim);
        const Corpus train_dim = records_of(train, dim);
        const Corpus test_dim = records_of(test, dim);

        const auto skip = [&](const std::string& why) {
            log << "warning: skipping dimension " << to_string(dim) << ": " << why << "\n";
            summary.skipped_dimensions.push_back(key);
            metrics_json["skipped"].push_back(key);
        };

        if (train_dim.size() < 2 || test_dim.empty()) {
            skip("not enough records");
            continue;
        }
        if (!has_both_classes(train_dim)) {
            skip("training split has a single class");
            continue;
        }

        Vocabulary vocab;
        try {
            vocab = Vocabulary::build(train_dim, cfg.min_df);
        } catch (const std::runtime_error& e) {
            skip(e.what());
            continue;
        }

        std::vector<FeatureVector> X;
        std::vector<SatisfactionLabel> y;
        X.reserve(train_dim.size());
        for (const SurveyRecord& r : train_dim.records) {
            X.push_back(vectorize(tokenize(r.text), vocab));
            y.push_back(r.label);
        }

        const RandomForestModel model = train_forest(X, y, vocab, forest_for(cfg, key));
        save_model(model, layout.model(key));
        {
            std::ofstream out(layout.vocab(key), std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + layout.vocab(key).string());
            out << vocab.to_json().dump() << '\n';
        }

        const EvalMetrics test_metrics = evaluate(model, test_dim);
        summary.trained_dimensions.push_back(key);
        summary.test_metrics[key] = test_metrics;

        ordered_json entry;
        entry["train_records"] = train_dim.size();
        entry["test_records"] = test_dim.size();
        entry["vocabulary_size"] = vocab.size();
        entry["train_accuracy"] = model.metrics.train_accuracy;
        entry["test"] = test_metrics.to_json();
        metrics_json["dimensions"][key] = std::move(entry);

        log << "trained " << key << ": " << train_dim.size() << " train records, "
            << "test accuracy " << test_metrics.accuracy << "\n";
    }

    write_jsonl(layout.metrics(), {metrics_json});
    return summary;
}

ExplainSummary cmd_explain(const RunConfig& cfg, const ExplainOptions& options,
                           std::ostream& log) {
    const bool want_lime = options.method == "lime" || options.method == "all";
    const bool want_shap = options.method == "shap" || options.method == "all";
    const bool want_anchor = options.method == "anchor" || options.method == "all";
    if (!want_lime && !want_shap && !want_anchor) {
        throw std::invalid_argument("explain method must be lime, shap, anchor or all; got \"" +
                                    options.method + "\"");
    }

    const Layout layout = layout_for(cfg);
    const TrainSummary models = ensure_models(cfg, log);
    const Corpus test = load_corpus(layout.test());
    ensure_dir(layout.out / "explanations");

    std::optional<Corpus> source; // loaded only for --id lookups
    if (!options.ids.empty()) {
        source = load_corpus(source_corpus_file(cfg, log));
        for (const std::string& id : options.ids) {
            const auto it = std::find_if(source->records.begin(), source->records.end(),
                                         [&](const SurveyRecord& r) { return r.id == id; });
            if (it == source->records.end()) {
                throw std::runtime_error("explain: id \"" + id +
                                         "\" not found in the corpus");
            }
            const std::string key = dimension_key(it->dimension);
            if (std::find(models.trained_dimensions.begin(),
                          models.trained_dimensions.end(),
                          key) == models.trained_dimensions.end()) {
                log << "warning: id " << id << " belongs to skipped dimension " << key
                    << "; no model to explain it with\n";
            }
        }
    }

    ExplainSummary summary;
    for (HoneycombDimension dim : kAllDimensions) {
        const std::string key = dimension_key(dim);
        if (std::find(models.trained_dimensions.begin(), models.trained_dimensions.end(),
                      key) == models.trained_dimensions.end()) {
            continue;
        }
        const LoadedModel loaded = load_dimension_model(layout, key);

        std::vector<SurveyRecord> instances;
        if (options.ids.empty()) {
            for (const SurveyRecord& r : test.records) {
                if (r.dimension == dim) instances.push_back(r);
            }
        } else {
            for (const std::string& id : options.ids) {
                const auto it = std::find_if(source->records.begin(), source->records.end(),
                                             [&](const SurveyRecord& r) { return r.id == id; });
                if (it != source->records.end() && it->dimension == dim) {
                    instances.push_back(*it);
                }
            }
        }

        std::vector<ordered_json> lime_lines, shap_lines, anchor_lines;
        const LimeConfig lime_cfg = lime_for(cfg, key);
        const ShapConfig shap_cfg = shap_for(cfg, key);
        const AnchorConfig anchor_cfg = anchor_for(cfg, key);

        for (const SurveyRecord& record : instances) {
            ++summary.n_instances;
            try {
                if (want_lime) {
                    lime_lines.push_back(lime_to_json(explain_lime(loaded.model, record,
                                                                   lime_cfg),
                                                      record.id));
                }
                if (want_shap) {
                    shap_lines.push_back(shap_to_json(explain_shap(loaded.model, record,
                                                                   shap_cfg),
                                                      record.id));
                }
                if (want_anchor) {
                    anchor_lines.push_back(anchor_to_json(find_anchor(loaded.model, record,
                                                                      anchor_cfg),
                                                          record.id));
                }
            } catch (const std::runtime_error& e) {
                log << "warning: skipping record " << record.id << ": " << e.what() << "\n";
                ++summary.n_skipped;
            }
        }

        const auto write_method = [&](const char* method,
                                      const std::vector<ordered_json>& lines) {
            const std::filesystem::path path = layout.explanation(key, method);
            write_jsonl(path, lines);
            summary.files.push_back(path);
        };
        if (want_lime) write_method("lime", lime_lines);
        if (want_shap) write_method("shap", shap_lines);
        if (want_anchor) write_method("anchor", anchor_lines);

        log << "explained " << instances.size() << " " << key << " instances\n";
    }
    return summary;
}

std::vector<std::filesystem::path> cmd_report(const RunConfig& cfg, std::ostream& log) {
    const Layout layout = layout_for(cfg);
    const TrainSummary models = ensure_models(cfg, log);
    ensure_explanations(cfg, models, log);

    const Corpus source = load_corpus(source_corpus_file(cfg, log));
    const Corpus test = load_corpus(layout.test());

    std::vector<std::filesystem::path> written;
    for (HoneycombDimension dim : kAllDimensions) {
        const std::string key = dimension_key(dim);
        if (std::find(models.trained_dimensions.begin(), models.trained_dimensions.end(),
                      key) == models.trained_dimensions.end()) {
            continue;
        }
        const LoadedModel loaded = load_dimension_model(layout, key);
        const Corpus test_dim = records_of(test, dim);

        // parsed explanation files
        std::vector<ShapExplanation> shap_list;
        std::map<std::string, ShapExplanation> shap_by_id;
        for (const ordered_json& line : read_jsonl(layout.explanation(key, "shap"))) {
            ShapExplanation exp = shap_from_json(line);
            shap_by_id[line.at("id").get<std::string>()] = exp;
            shap_list.push_back(std::move(exp));
        }
        std::map<std::string, LimeExplanation> lime_by_id;
        for (const ordered_json& line : read_jsonl(layout.explanation(key, "lime"))) {
            lime_by_id[line.at("id").get<std::string>()] = lime_from_json(line);
        }
        std::map<std::string, AnchorResult> anchor_by_id;
        for (const ordered_json& line : read_jsonl(layout.explanation(key, "anchor"))) {
            anchor_by_id[line.at("id").get<std::string>()] = anchor_from_json(line);
        }

        DimensionReport report;
        report.dimension = dim;
        report.metrics = evaluate(loaded.model, test_dim);

        GlobalShapSummary summary = aggregate_global(shap_list);
        if (summary.tokens.size() > cfg.report.top_keywords) {
            summary.tokens.resize(cfg.report.top_keywords);
        }
        report.keywords = summary.tokens;

        report.cloud_frequency = word_cloud_frequency(source, dim, cfg.report.word_cloud_top_n);
        report.cloud_shap = word_cloud_shap(shap_list, cfg.report.word_cloud_top_n);

        for (const TokenShapStats& s : report.keywords) {
            report.distributions[s.token] = shap_distribution(s.token, shap_list);
        }

        // Most-confident instances on each side, ties to the smaller id.
        const SurveyRecord* best_pos = nullptr;
        const SurveyRecord* best_neg = nullptr;
        double best_pos_p = -1.0, best_neg_p = 2.0;
        for (const SurveyRecord& r : test_dim.records) {
            const double p =
                predict_proba(loaded.model, vectorize(tokenize(r.text), loaded.vocab)).p_sat;
            if (p > best_pos_p || (p == best_pos_p && best_pos && r.id < best_pos->id)) {
                best_pos_p = p;
                best_pos = &r;
            }
            if (p < best_neg_p || (p == best_neg_p && best_neg && r.id < best_neg->id)) {
                best_neg_p = p;
                best_neg = &r;
            }
        }
        const auto make_sample =
            [&](const SurveyRecord* r, double p) -> std::optional<SampleExplanation> {
            if (!r) return std::nullopt;
            const auto lime_it = lime_by_id.find(r->id);
            const auto anchor_it = anchor_by_id.find(r->id);
            if (lime_it == lime_by_id.end() || anchor_it == anchor_by_id.end()) {
                return std::nullopt;
            }
            return SampleExplanation{r->id, p, lime_it->second, anchor_it->second};
        };
        report.sample_positive = make_sample(best_pos, best_pos_p);
        report.sample_negative = make_sample(best_neg, best_neg_p);

        for (std::filesystem::path& path : render_report(report, layout.reports())) {
            written.push_back(std::move(path));
        }
        log << "report written for " << key << "\n";
    }
    return written;
}

void cmd_run_all(const RunConfig& cfg, std::ostream& log) {
    log << "[1/6] corpus\n";
    if (!cfg.corpus_path()) cmd_generate(cfg, log);
    cmd_ingest(cfg, log);

    log << "[2/6] split + augment\n";
    cmd_augment(cfg, log);

    log << "[3/6] train\n";
    cmd_train(cfg, log);

    log << "[4/6] explain\n";
    ExplainOptions options;
    options.method = "all";
    options.all_test = true;
    cmd_explain(cfg, options, log);

    log << "[5/6] report\n";
    cmd_report(cfg, log);

    log << "[6/6] done\n";
}

} // namespace uxexplain::pipeline
