#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eigenmood/aggregate.hpp"
#include "eigenmood/spectral.hpp"

namespace eigenmood::cli {

// Everything a stage needs; serialized as <command>_config.json into the
// output directory so any run can be replayed byte for byte.
struct RunConfig {
    std::vector<std::string> inputs;  // ingest: one JSONL file per poet
    std::string out_dir = "run";
    std::string corpus_path;          // override; default <out_dir>/corpus.jsonl

    WeightPolicy policy;
    LaplacianKind laplacian = LaplacianKind::Unnormalized;
    double min_share = 1e-3;
    bool dedup = false;
    bool strict = true;
    bool augment = false;       // profile: also emit the abstention-as-category variant
    int replicates = 0;         // bootstrap replicate count; 0 disables
    std::uint64_t seed = 12061;
    int k_max = 3;
    long top_n = 10;
    bool emit_svg = false;
    bool exclude_rare = false;  // validate: drop rare concepts from macro averages
    long rare_floor = 10;

    std::string sheet_path;      // validate: dual-annotation CSV
    std::string verses_path;     // annotate-mock: one verse per line
    std::string responses_path;  // annotate-mock: JSON array of canned responses
    std::string prompt_path;     // annotate-mock: instruction template
};

// Bad invocations (missing stage inputs that the user controls directly).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

void cmd_ingest(const RunConfig& config);
void cmd_profile(const RunConfig& config);
void cmd_spectral(const RunConfig& config);
void cmd_validate(const RunConfig& config);
void cmd_report(const RunConfig& config);
void cmd_annotate_mock(const RunConfig& config);

// Runs a stage and maps exceptions onto the exit-code contract
// (0 ok, 1 usage, 2 data validation, 3 internal).
int run_guarded(void (*command)(const RunConfig&), const RunConfig& config);

// Snapshot loader shared by the downstream stages.
Corpus load_snapshot(const RunConfig& config);

}  // namespace eigenmood::cli
