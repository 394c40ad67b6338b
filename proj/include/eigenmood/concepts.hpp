#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eigenmood {

// Closed nine-label ontology, in fixed alphabetical order. Concept indices
// are column indices everywhere a matrix or distribution is built.
enum class Concept : std::uint8_t {
    AmbivalentAttachment = 0,
    EmotionalDependency,
    Idealization,
    IdentityFragmentation,
    InternalProjection,
    Melancholia,
    RomanticObsession,
    SelfDestructiveIdealization,
    SpiritualNarcissism,
};

inline constexpr std::size_t kConceptCount = 9;

// Synthetic column used by abstention-augmented matrices; always last.
inline constexpr std::string_view kAbstainName = "ABSTAIN";

constexpr std::array<std::string_view, kConceptCount> kConceptNames = {
    "ambivalent_attachment",
    "emotional_dependency",
    "idealization",
    "identity_fragmentation",
    "internal_projection",
    "melancholia",
    "romantic_obsession",
    "self_destructive_idealization",
    "spiritual_narcissism",
};

inline std::string_view concept_name(Concept c) {
    return kConceptNames[static_cast<std::size_t>(c)];
}

inline std::optional<Concept> concept_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kConceptCount; ++i) {
        if (kConceptNames[i] == name) return static_cast<Concept>(i);
    }
    return std::nullopt;
}

inline std::vector<std::string> ontology_names(bool with_abstain = false) {
    std::vector<std::string> out;
    out.reserve(kConceptCount + (with_abstain ? 1 : 0));
    for (auto n : kConceptNames) out.emplace_back(n);
    if (with_abstain) out.emplace_back(kAbstainName);
    return out;
}

// Data-level failure (bad input file, mismatched shapes, empty populations).
// The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace eigenmood
