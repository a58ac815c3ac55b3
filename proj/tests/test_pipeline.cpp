// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <map>
#include <sstream>

#include "helpers.hpp"
#include "uxexplain/pipeline.hpp"

using namespace uxexplain;
using namespace uxexplain::pipeline;

namespace {

nlohmann::json tiny_config_json() {
    return nlohmann::json{
        {"seed", 1},
        {"synthetic", {{"n_per_dimension", 10}}},
        {"forest", {{"n_trees", 30}, {"max_depth", 8}}},
        {"lime", {{"n_samples", 200}, {"top_k", 5}}},
        {"anchor", {{"batch", 50}, {"max_samples_per_candidate", 2000}}},
        {"report", {{"top_keywords", 5}, {"word_cloud_top_n", 10}}},
    };
}

RunConfig tiny_config(const std::filesystem::path& out) {
    RunConfig cfg = RunConfig::from_json(tiny_config_json(), ".");
    cfg.paths.out = out.string();
    return cfg;
}

// relative path -> file bytes for a whole output tree
std::map<std::string, std::string> snapshot_tree(const std::filesystem::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        files[std::filesystem::relative(entry.path(), root).string()] =
            uxtest::read_file(entry.path());
    }
    return files;
}

int run_cli(const std::string& args, const std::filesystem::path& capture) {
    const char* bin = std::getenv("UXEXPLAIN_BIN");
    REQUIRE(bin != nullptr);
    const std::string command = std::string(bin) + " " + args + " >" + capture.string() +
                                " 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("RunConfig: defaults, overrides and field-naming errors") {
    const RunConfig defaults = RunConfig::from_json(nlohmann::json::object(), ".");
    CHECK(defaults.seed == 1);
    CHECK(defaults.split_fraction == 0.2);
    CHECK(defaults.forest.n_trees == 100);
    CHECK(defaults.lime.n_samples == 5000);
    CHECK(defaults.shap.exact_limit == 12);
    CHECK(defaults.anchor.tau == 0.95);

    const RunConfig cfg = RunConfig::from_json(tiny_config_json(), ".");
    CHECK(cfg.synthetic_n_per_dimension == 10);
    CHECK(cfg.forest.n_trees == 30);
    CHECK(cfg.lime.top_k == 5);

    CHECK_THROWS_WITH_AS(
        RunConfig::from_json(nlohmann::json{{"split_fraction", 1.5}}, "."),
        doctest::Contains("split_fraction"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(RunConfig::from_json(nlohmann::json{{"splitfraction", 0.2}}, "."),
                         doctest::Contains("unknown config field \"splitfraction\""),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        RunConfig::from_json(nlohmann::json{{"anchor", {{"tau", 0.0}}}}, "."),
        doctest::Contains("anchor.tau"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        RunConfig::from_json(nlohmann::json{{"lime", {{"n_samples", -5}}}}, "."),
        doctest::Contains("lime.n_samples"), std::invalid_argument);
}

TEST_CASE("cmd_generate and cmd_ingest produce a consistent summary") {
    uxtest::TempDir tmp("pipe");
    const RunConfig cfg = tiny_config(tmp.path / "out");
    std::ostringstream log;

    const auto path = cmd_generate(cfg, log);
    CHECK(std::filesystem::exists(path));

    const IngestSummary summary = cmd_ingest(cfg, log);
    CHECK(summary.n_records == 60);
    REQUIRE(summary.per_dimension.size() == 6);
    for (const auto& [key, counts] : summary.per_dimension) {
        CHECK(counts[0] + counts[1] == 10);
        CHECK(counts[0] == 5);
        CHECK(counts[1] == 5);
    }

    // ingest without a corpus or generated file fails with advice
    uxtest::TempDir other("pipe");
    const RunConfig fresh = tiny_config(other.path / "out");
    CHECK_THROWS_WITH_AS(cmd_ingest(fresh, log), doctest::Contains("generate"),
                         std::runtime_error);
}

TEST_CASE("run_all produces six reports and augments only the training split") {
    uxtest::TempDir tmp("pipe");
    const RunConfig cfg = tiny_config(tmp.path / "out");
    std::ostringstream log;

    cmd_run_all(cfg, log);

    const auto out = tmp.path / "out";
    size_t reports = 0;
    for (HoneycombDimension d : kAllDimensions) {
        const auto path = out / "reports" / (dimension_key(d) + ".report.json");
        if (std::filesystem::exists(path)) ++reports;
    }
    CHECK(reports == 6);

    // augmented ids only in the augmented train corpus
    const Corpus test = load_corpus(out / "split" / "test.jsonl");
    for (const SurveyRecord& r : test.records) {
        CHECK(r.id.find("-sr") == std::string::npos);
        CHECK(r.id.find("-rd") == std::string::npos);
    }
    const Corpus augmented = load_corpus(out / "split" / "train_augmented.jsonl");
    const Corpus train = load_corpus(out / "split" / "train.jsonl");
    CHECK(augmented.size() == train.size() * 5); // 4 methods x 1 variant + original

    // train/test ids partition the synthetic corpus
    const Corpus source = load_corpus(out / "synthetic_corpus.jsonl");
    CHECK(train.size() + test.size() == source.size());

    // explanation files exist per dimension and method
    for (HoneycombDimension d : kAllDimensions) {
        for (const char* method : {"lime", "shap", "anchor"}) {
            CHECK(std::filesystem::exists(out / "explanations" /
                                          (dimension_key(d) + "." + method + ".jsonl")));
        }
    }
}

TEST_CASE("run_all is deterministic across directories and idempotent in place") {
    uxtest::TempDir tmp("pipe");
    std::ostringstream log;

    const RunConfig cfg1 = tiny_config(tmp.path / "one");
    cmd_run_all(cfg1, log);
    const auto tree1 = snapshot_tree(tmp.path / "one");

    const RunConfig cfg2 = tiny_config(tmp.path / "two");
    cmd_run_all(cfg2, log);
    const auto tree2 = snapshot_tree(tmp.path / "two");

    REQUIRE(!tree1.empty());
    CHECK(tree1 == tree2);

    // second run into the same directory rewrites identical bytes
    cmd_run_all(cfg1, log);
    CHECK(snapshot_tree(tmp.path / "one") == tree1);

    // a different seed changes the outputs
    RunConfig cfg3 = tiny_config(tmp.path / "three");
    cfg3.seed = 2;
    cmd_run_all(cfg3, log);
    CHECK(snapshot_tree(tmp.path / "three") != tree1);
}

TEST_CASE("dimensions with a single class are skipped, not fatal") {
    uxtest::TempDir tmp("pipe");

    // usability flipped to all-Satisfied; other dimensions intact
    Corpus corpus = generate_synthetic(1, 10);
    for (SurveyRecord& r : corpus.records) {
        if (r.dimension == HoneycombDimension::Usability) {
            r.label = SatisfactionLabel::Satisfied;
        }
    }
    const auto corpus_path = tmp.path / "corpus.jsonl";
    save_corpus(corpus, corpus_path);

    RunConfig cfg = tiny_config(tmp.path / "out");
    cfg.paths.corpus = corpus_path.string();
    cfg.config_dir = tmp.path;

    const std::string corpus_before = uxtest::read_file(corpus_path);
    std::ostringstream log;
    cmd_run_all(cfg, log);
    CHECK(log.str().find("warning") != std::string::npos);
    CHECK(log.str().find("Usability") != std::string::npos);

    // commands never mutate their inputs
    CHECK(uxtest::read_file(corpus_path) == corpus_before);

    CHECK(!std::filesystem::exists(tmp.path / "out" / "reports" / "usability.report.json"));
    CHECK(std::filesystem::exists(tmp.path / "out" / "reports" / "credibility.report.json"));
}

TEST_CASE("cmd_explain honors method and id selection") {
    uxtest::TempDir tmp("pipe");
    const RunConfig cfg = tiny_config(tmp.path / "out");
    std::ostringstream log;
    cmd_generate(cfg, log);
    cmd_train(cfg, log);

    ExplainOptions options;
    options.method = "shap";
    options.all_test = true;
    const ExplainSummary summary = cmd_explain(cfg, options, log);
    CHECK(summary.n_instances > 0);
    for (const auto& file : summary.files) {
        CHECK(file.string().find(".shap.jsonl") != std::string::npos);
    }

    // a specific id, and an unknown one
    const Corpus test = load_corpus(tmp.path / "out" / "split" / "test.jsonl");
    ExplainOptions one;
    one.method = "lime";
    one.ids = {test.records[0].id};
    const ExplainSummary single = cmd_explain(cfg, one, log);
    CHECK(single.n_instances == 1);

    ExplainOptions missing;
    missing.ids = {"no-such-id"};
    CHECK_THROWS_WITH_AS(cmd_explain(cfg, missing, log),
                         doctest::Contains("no-such-id"), std::runtime_error);

    ExplainOptions bad;
    bad.method = "gradient";
    CHECK_THROWS_AS(cmd_explain(cfg, bad, log), std::invalid_argument);
}

TEST_CASE("cmd_report rebuilds its missing prerequisites") {
    uxtest::TempDir tmp("pipe");
    const RunConfig cfg = tiny_config(tmp.path / "out");
    std::ostringstream log;

    // report from a cold start: generates, splits, trains and explains first
    const auto written = cmd_report(cfg, log);
    CHECK(written.size() >= 6);
    CHECK(std::filesystem::exists(tmp.path / "out" / "models" / "metrics.json"));
    CHECK(std::filesystem::exists(tmp.path / "out" / "explanations" /
                                  "usability.shap.jsonl"));

    // the written reports parse and carry the expected dimension
    const auto parsed = nlohmann::json::parse(
        uxtest::read_file(tmp.path / "out" / "reports" / "usability.report.json"));
    CHECK(parsed.at("dimension") == "Usability");
    CHECK(parsed.at("metrics").at("n").get<size_t>() > 0);
}

TEST_CASE("CLI: exit codes and config diagnostics") {
    uxtest::TempDir tmp("cli");

    CHECK(run_cli("--help", tmp.path / "help.txt") == 0);

    uxtest::write_file(tmp.path / "bad.json", R"({"split_fraction": 1.5})");
    const int status =
        run_cli("train --config " + (tmp.path / "bad.json").string(), tmp.path / "err.txt");
    CHECK(status != 0);
    CHECK(uxtest::read_file(tmp.path / "err.txt").find("split_fraction") !=
          std::string::npos);

    // seed flag overrides the config seed
    uxtest::write_file(tmp.path / "gen.json",
                       R"({"seed": 1, "synthetic": {"n_per_dimension": 4}, "paths": {"out": ")" +
                           (tmp.path / "gen_out").string() + R"("}})");
    CHECK(run_cli("generate --config " + (tmp.path / "gen.json").string() + " --seed 2",
                  tmp.path / "gen.txt") == 0);
    const Corpus generated = load_corpus(tmp.path / "gen_out" / "synthetic_corpus.jsonl");
    CHECK(generated == generate_synthetic(2, 4));
    CHECK(generated != generate_synthetic(1, 4));

    // ingest accepts a positional corpus path and summarizes it
    const auto corpus_arg = (tmp.path / "gen_out" / "synthetic_corpus.jsonl").string();
    CHECK(run_cli("ingest " + corpus_arg, tmp.path / "ingest.txt") == 0);
    const std::string ingest_log = uxtest::read_file(tmp.path / "ingest.txt");
    CHECK(ingest_log.find("24 records") != std::string::npos);

    // a broken corpus line is reported with its location, nonzero exit
    uxtest::write_file(tmp.path / "broken.jsonl",
                       R"({"id":"a","text":"x","dimension":"Value","label":0})" "\n");
    CHECK(run_cli("ingest " + (tmp.path / "broken.jsonl").string(),
                  tmp.path / "broken.txt") != 0);
    CHECK(uxtest::read_file(tmp.path / "broken.txt").find("unknown dimension") !=
          std::string::npos);
}
