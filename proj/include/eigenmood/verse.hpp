#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "eigenmood/concepts.hpp"

namespace eigenmood {

// One predicted label with its confidence score in [0,1].
struct LabelInstance {
    Concept label;
    double confidence;

    friend bool operator==(const LabelInstance&, const LabelInstance&) = default;
};

// One verse record as produced by the annotation workflow.
// Invariants (enforced at parse time):
//   - abstain == true implies labels empty
//   - labels sorted by concept index, no duplicates
//   - every confidence in [0,1]
struct AnnotatedVerse {
    std::string poet;
    std::string text;
    std::vector<LabelInstance> labels;
    std::map<std::string, std::string> rationale;  // audit only, never used in analytics
    bool abstain = false;
    std::string notes;
    int source_line = 1;

    bool has_label(Concept c) const {
        for (const auto& li : labels)
            if (li.label == c) return true;
        return false;
    }
    double confidence_for(Concept c) const {
        for (const auto& li : labels)
            if (li.label == c) return li.confidence;
        return 0.0;
    }
    double max_confidence() const {
        double m = 0.0;
        for (const auto& li : labels)
            if (li.confidence > m) m = li.confidence;
        return m;
    }

    friend bool operator==(const AnnotatedVerse&, const AnnotatedVerse&) = default;
};

// Identifies a verse across reports: poet id plus 1-based source line.
struct VerseRef {
    std::string poet;
    int line = 0;

    friend bool operator==(const VerseRef&, const VerseRef&) = default;
    friend auto operator<=>(const VerseRef&, const VerseRef&) = default;
};

struct Corpus {
    std::vector<AnnotatedVerse> verses;   // sorted by poet, then source line
    std::vector<std::string> poets;       // ordered unique poet identifiers

    std::size_t poet_index(const std::string& poet) const {
        for (std::size_t i = 0; i < poets.size(); ++i)
            if (poets[i] == poet) return i;
        throw DataError("unknown poet: " + poet);
    }
};

// Schema/parse failures are expected control flow during ingest and gateway
// validation, so they travel as values rather than exceptions.
enum class SchemaErrorKind {
    InvalidStructure,    // not a JSON object / not parseable at all
    MissingField,
    WrongType,
    UnknownLabel,
    ConfidenceRange,     // confidence outside [0,1]
    KeyMismatch,         // confidences key set != labels set
    InconsistentAbstain, // abstain=true with nonempty labels/confidences
};

std::string_view schema_error_kind_name(SchemaErrorKind kind);

struct SchemaError {
    SchemaErrorKind kind;
    std::string message;
    int line = 0;  // 1-based source line when known
};

using ParseResult = std::variant<AnnotatedVerse, SchemaError>;

inline bool is_ok(const ParseResult& r) { return std::holds_alternative<AnnotatedVerse>(r); }
inline const AnnotatedVerse& get_verse(const ParseResult& r) { return std::get<AnnotatedVerse>(r); }
inline const SchemaError& get_error(const ParseResult& r) { return std::get<SchemaError>(r); }

}  // namespace eigenmood
