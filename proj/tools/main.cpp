#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "eigenmood/cli.hpp"

namespace {

using eigenmood::LaplacianKind;
using eigenmood::WeightKind;
using eigenmood::cli::RunConfig;

void add_policy_flags(CLI::App* cmd, RunConfig& config, std::string& weight,
                      std::string& laplacian, double& tau) {
    cmd->add_option("--tau", tau, "confidence threshold; keeps label instances with p >= tau")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--weight", weight, "evidence weighting: confidence|uniform")
        ->check(CLI::IsMember({"confidence", "uniform"}));
    cmd->add_option("--laplacian", laplacian, "graph Laplacian: unnorm|sym")
        ->check(CLI::IsMember({"unnorm", "sym"}));
    cmd->add_option("--min-share", config.min_share,
                    "baseline share floor for the spectral concept filter");
    cmd->add_option("--replicates", config.replicates, "bootstrap replicates (0 = off)");
    cmd->add_option("--seed", config.seed, "seed for every stochastic step");
    cmd->add_option("--k-max", config.k_max, "number of non-trivial embedding axes");
    cmd->add_option("--top-n", config.top_n, "rows per retrieval file");
    cmd->add_option("--out", config.out_dir, "run directory for all outputs");
    cmd->add_option("--corpus", config.corpus_path, "corpus snapshot path override");
}

void apply_policy(RunConfig& config, const std::string& weight, const std::string& laplacian,
                  double tau) {
    config.policy.kind = weight == "uniform" ? WeightKind::Uniform : WeightKind::Confidence;
    if (tau >= 0.0) config.policy.threshold = tau;  // negative sentinel = no threshold
    config.laplacian =
        laplacian == "sym" ? LaplacianKind::SymmetricNormalized : LaplacianKind::Unnormalized;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verse-annotation analytics: uncertainty-aware poet profiles, spectral "
                 "concept embeddings, retrieval, and validation reports"};
    app.require_subcommand(1);

    RunConfig config;
    std::string weight = "confidence";
    std::string laplacian = "unnorm";
    double tau = -1.0;

    auto* ingest = app.add_subcommand("ingest", "load, validate and snapshot annotation files");
    ingest->add_option("inputs", config.inputs, "one <POET>_labels.jsonl per poet")->required();
    ingest->add_flag("--dedup", config.dedup, "drop within-poet duplicate verses");
    bool lenient = false;
    ingest->add_flag("--lenient", lenient, "skip and log bad records instead of aborting");

    auto* profile =
        app.add_subcommand("profile", "concept matrix, distributions, lifts, divergence ranking");
    profile->add_flag("--augment", config.augment,
                      "also emit the abstention-as-category divergence variant");

    auto* spectral = app.add_subcommand(
        "spectral", "co-occurrence graph, eigen decomposition, embedding, retrieval");

    auto* validate =
        app.add_subcommand("validate", "agreement, adjudicated accuracy, calibration, coverage");
    validate->add_option("--sheet", config.sheet_path, "dual-annotation CSV")->required();
    validate->add_flag("--exclude-rare", config.exclude_rare,
                       "drop rare concepts from macro averages");
    validate->add_option("--rare-floor", config.rare_floor,
                         "prevalence floor used with --exclude-rare");

    auto* report = app.add_subcommand("report", "figure-data CSV bundle from prior stages");
    report->add_flag("--svg", config.emit_svg, "also render minimal SVG charts");

    auto* annotate =
        app.add_subcommand("annotate-mock", "run the retry gateway against a scripted backend");
    annotate->add_option("--verses", config.verses_path, "plain text, one verse per line")
        ->required();
    annotate->add_option("--responses", config.responses_path,
                         "JSON array of canned backend responses")
        ->required();
    annotate->add_option("--prompt", config.prompt_path, "instruction template text file");

    for (auto* cmd : {ingest, profile, spectral, validate, report, annotate})
        add_policy_flags(cmd, config, weight, laplacian, tau);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return eigenmood::cli::kExitUsage;
    }

    config.strict = !lenient;
    apply_policy(config, weight, laplacian, tau);

    using eigenmood::cli::run_guarded;
    if (ingest->parsed()) return run_guarded(eigenmood::cli::cmd_ingest, config);
    if (profile->parsed()) return run_guarded(eigenmood::cli::cmd_profile, config);
    if (spectral->parsed()) return run_guarded(eigenmood::cli::cmd_spectral, config);
    if (validate->parsed()) return run_guarded(eigenmood::cli::cmd_validate, config);
    if (report->parsed()) return run_guarded(eigenmood::cli::cmd_report, config);
    if (annotate->parsed()) return run_guarded(eigenmood::cli::cmd_annotate_mock, config);
    return eigenmood::cli::kExitUsage;
}
