#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eigenmood/verse.hpp"

namespace eigenmood {

// Fixed additive smoothing constant; not configurable so that runs stay
// comparable across configurations.
inline constexpr double kEpsilon = 1e-9;

enum class WeightKind { Confidence, Uniform };

// How a label instance turns into evidence mass. Confidence weighting uses
// the instance's score; uniform assigns unit mass. An optional threshold
// keeps only instances with confidence >= tau (closed comparison) under
// either kind.
struct WeightPolicy {
    WeightKind kind = WeightKind::Confidence;
    std::optional<double> threshold;

    double instance_mass(double confidence) const {
        if (threshold && confidence < *threshold) return 0.0;
        return kind == WeightKind::Uniform ? 1.0 : confidence;
    }
    bool retains(double confidence) const {
        return !threshold || confidence >= *threshold;
    }
};

std::string weight_policy_name(const WeightPolicy& policy);

// Dense poet x concept evidence-mass matrix. Entries are nonnegative;
// abstained verses contribute zero everywhere except the synthetic ABSTAIN
// column of augmented matrices.
struct PoetConceptMatrix {
    std::vector<std::string> poets;
    std::vector<std::string> concepts;  // column names; ABSTAIN last when augmented
    std::vector<double> mass;           // row-major [poets x concepts]
    bool includes_abstain = false;

    double& at(std::size_t poet, std::size_t col) { return mass[poet * concepts.size() + col]; }
    double at(std::size_t poet, std::size_t col) const { return mass[poet * concepts.size() + col]; }
    std::vector<double> row(std::size_t poet) const {
        return {mass.begin() + static_cast<std::ptrdiff_t>(poet * concepts.size()),
                mass.begin() + static_cast<std::ptrdiff_t>((poet + 1) * concepts.size())};
    }
};

// Smoothed probability row over a concept set: strictly positive, unit sum.
struct ConceptDistribution {
    std::vector<std::string> concepts;
    std::vector<double> probs;
    double epsilon = kEpsilon;
};

// Signed per-concept difference between a poet distribution and a baseline.
struct LiftProfile {
    std::vector<std::string> concepts;
    std::vector<double> delta;

    // (concept, delta) pairs sorted by delta, most positive first.
    std::vector<std::pair<std::string, double>> sorted() const;
};

PoetConceptMatrix poet_concept_mass(const Corpus& corpus, const WeightPolicy& policy);

// Augmented variant over the ontology plus ABSTAIN: each abstained verse
// contributes exactly unit mass to the ABSTAIN column.
PoetConceptMatrix augment_with_abstain(const Corpus& corpus, const WeightPolicy& policy);

ConceptDistribution to_distribution(const std::vector<std::string>& concepts,
                                    const std::vector<double>& mass_row,
                                    double epsilon = kEpsilon);

ConceptDistribution poet_distribution(const PoetConceptMatrix& m, std::size_t poet_row,
                                      double epsilon = kEpsilon);

// Pools all rows: P0(c) = sum_i(X[i,c]+eps) / sum_i sum_c'(X[i,c']+eps).
ConceptDistribution global_baseline(const PoetConceptMatrix& m, double epsilon = kEpsilon);

LiftProfile concept_lift(const ConceptDistribution& poet, const ConceptDistribution& baseline);

}  // namespace eigenmood
