#pragma once

#include <string>

namespace eigenmood {

// Text canonicalization knobs. Dedup keys are a pure function of
// (policy, text); stored verse text is normalized without diacritic
// stripping, which only ever applies to duplicate detection.
struct NormalizationPolicy {
    bool unicode_nfkc = true;
    bool collapse_whitespace = true;
    bool strip_diacritics_for_dedup = true;

    friend bool operator==(const NormalizationPolicy&, const NormalizationPolicy&) = default;
};

// Applies, in order: NFKC normalization, whitespace collapsing (runs of
// Unicode whitespace -> single space, trimmed), removal of nonspacing-mark
// code points. Each step gated by the policy. Total function: invalid UTF-8
// sequences are substituted with U+FFFD during NFKC and otherwise passed
// through untouched.
std::string normalize_text(const std::string& text, const NormalizationPolicy& policy);

// Key used for duplicate detection: normalize_text with the diacritic
// stripping flag honored.
std::string dedup_key(const std::string& text, const NormalizationPolicy& policy);

}  // namespace eigenmood
