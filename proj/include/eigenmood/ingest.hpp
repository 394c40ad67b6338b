#pragma once

#include <string>
#include <vector>

#include "eigenmood/text.hpp"
#include "eigenmood/verse.hpp"

namespace eigenmood {

struct ParseOptions {
    // Lenient mode imputes a missing per-label confidence as 0.0 (flagged as
    // a warning) instead of rejecting the record. Default strict.
    bool lenient = false;
};

// Parses and validates one JSONL record. poet_hint (normally the filename
// prefix) is used only when the record carries no poet field.
ParseResult parse_record(const std::string& line, const std::string& poet_hint,
                         int line_no = 1, const ParseOptions& opts = {},
                         std::vector<std::string>* warnings = nullptr);

// Emits one JSONL line; parse_record(serialize_record(v)) == v.
std::string serialize_record(const AnnotatedVerse& v);

struct LineIssue {
    std::string file;
    std::string poet;
    int line = 0;
    std::string message;
};

struct LoadReport {
    std::vector<LineIssue> errors;    // rejected records (lenient mode only; strict aborts)
    std::vector<LineIssue> warnings;  // imputed confidences and similar flags
};

struct LoadOptions {
    bool strict = true;
    NormalizationPolicy normalization;  // applied to stored verse text (no diacritic stripping)
};

// Poet identifier derived from a file name shaped <POET>_labels.jsonl
// (falls back to the bare stem).
std::string poet_from_filename(const std::string& path);

// Loads one JSONL file per poet and merges into a corpus ordered by
// (poet, source line). Strict mode throws DataError on the first bad record.
Corpus load_corpus(const std::vector<std::string>& paths, const LoadOptions& opts,
                   LoadReport* report = nullptr);

struct DedupRemoval {
    std::string poet;
    int line = 0;
    int kept_line = 0;  // line of the surviving first occurrence
};

struct DedupReport {
    std::vector<DedupRemoval> removed;
};

// Removes within-poet duplicates (first occurrence wins, file order).
// Duplicates under different poets are never merged. Idempotent.
std::pair<Corpus, DedupReport> dedup_corpus(const Corpus& corpus,
                                            const NormalizationPolicy& policy);

struct PoetStats {
    std::string poet;
    long verses = 0;
    long abstained = 0;
    double abstain_rate = 0.0;
    long label_instances = 0;
    double mean_confidence = 0.0;
};

struct CorpusStats {
    long verses = 0;
    long abstained = 0;
    double abstain_rate = 0.0;
    bool abstain_rate_defined = false;  // false on an empty corpus
    long label_instances = 0;
    double labels_per_annotated_verse = 0.0;
    bool labels_per_verse_defined = false;
    double confidence_min = 0.0;
    double confidence_mean = 0.0;
    double confidence_max = 0.0;
    bool confidence_defined = false;
    std::vector<PoetStats> per_poet;
};

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace eigenmood
