// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the survey-explanation pipeline:
// ingest / generate / augment / train / explain / report / run-all.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uxexplain/pipeline.hpp"

namespace {

struct GlobalFlags {
    std::optional<std::string> config;
    std::optional<uint64_t> seed;
    std::optional<std::string> out;
};

uxexplain::pipeline::RunConfig make_config(const GlobalFlags& flags) {
    uxexplain::pipeline::RunConfig cfg;
    if (flags.config) {
        cfg = uxexplain::pipeline::RunConfig::load(*flags.config);
    }
    // precedence: flag > config > default
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.out) cfg.paths.out = *flags.out;
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Survey-text satisfaction classification with local explanations"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags flags;
    app.add_option("--config", flags.config, "Run configuration JSON file");
    app.add_option("--seed", flags.seed, "Override the global seed");
    app.add_option("--out", flags.out, "Override the output directory");

    std::string ingest_corpus;
    CLI::App* ingest = app.add_subcommand("ingest", "Validate and summarize a corpus file");
    ingest->add_option("corpus", ingest_corpus, "Corpus JSONL file (defaults to config)");

    app.add_subcommand("generate", "Write the deterministic synthetic corpus");
    app.add_subcommand("augment", "Split the corpus and augment the training half");
    app.add_subcommand("train", "Train one classifier per dimension");

    uxexplain::pipeline::ExplainOptions explain_options;
    CLI::App* explain = app.add_subcommand("explain", "Explain test instances");
    explain->add_option("--method", explain_options.method,
                        "lime, shap, anchor or all")
        ->default_val("all");
    explain->add_option("--id", explain_options.ids, "Explain specific record ids");
    explain->add_flag("--all-test", explain_options.all_test,
                      "Explain every test instance (default when no --id is given)");

    app.add_subcommand("report", "Build per-dimension keyword reports");
    app.add_subcommand("run-all", "Run the whole pipeline end to end");

    CLI11_PARSE(app, argc, argv);

    try {
        const uxexplain::pipeline::RunConfig cfg = make_config(flags);
        if (app.got_subcommand("ingest")) {
            std::optional<std::filesystem::path> override;
            if (!ingest_corpus.empty()) override = ingest_corpus;
            uxexplain::pipeline::cmd_ingest(cfg, std::cout, override);
        } else if (app.got_subcommand("generate")) {
            uxexplain::pipeline::cmd_generate(cfg, std::cout);
        } else if (app.got_subcommand("augment")) {
            uxexplain::pipeline::cmd_augment(cfg, std::cout);
        } else if (app.got_subcommand("train")) {
            uxexplain::pipeline::cmd_train(cfg, std::cout);
        } else if (app.got_subcommand("explain")) {
            uxexplain::pipeline::cmd_explain(cfg, explain_options, std::cout);
        } else if (app.got_subcommand("report")) {
            uxexplain::pipeline::cmd_report(cfg, std::cout);
        } else if (app.got_subcommand("run-all")) {
            uxexplain::pipeline::cmd_run_all(cfg, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
