#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "eigenmood/verse.hpp"

namespace eigenmood {

// Per-verse judgments from two independent annotators, plus their votes on
// whether the model's abstention decision was appropriate.
struct DualAnnotation {
    VerseRef ref;
    std::set<Concept> annotator_a;
    std::set<Concept> annotator_b;
    bool a_abstain_ok = false;
    bool b_abstain_ok = false;
};

struct AdjudicatedReference {
    VerseRef ref;
    std::set<Concept> labels;  // union of the two annotators
};

AdjudicatedReference adjudicate(const DualAnnotation& dual);

struct StratumSpec {
    std::string name;
    std::function<bool(const AnnotatedVerse&)> contains;
};

// abstained / low (max conf < 0.7) / medium [0.7, 0.8) / high (>= 0.8).
std::vector<StratumSpec> default_strata();

// Largest-remainder proportional allocation of `total` across stratum
// populations, capped by each population. Exposed for oracle tests.
std::vector<long> largest_remainder_allocation(const std::vector<long>& populations, long total);

// Proportional stratified sample without replacement, deterministic under
// the seed, topped up so every concept present in the corpus appears in the
// sample (swap-in of the strongest carrier; appended only when no sampled
// verse can be evicted safely).
std::vector<VerseRef> stratified_sample(const Corpus& corpus, long total,
                                        const std::vector<StratumSpec>& strata,
                                        std::uint64_t seed);

struct KappaResult {
    double p_o = 0.0;
    double p_e = 0.0;
    double kappa = 0.0;
    bool defined = true;  // false when chance agreement is 1
    long pos_a = 0;
    long pos_b = 0;
};

KappaResult cohen_kappa(const std::vector<bool>& a_marks, const std::vector<bool>& b_marks);

struct ConceptAgreement {
    std::string concept_name;
    KappaResult kappa;
};

struct AgreementReport {
    std::vector<ConceptAgreement> per_concept;
    double macro_kappa = 0.0;
    int excluded = 0;  // concepts dropped by the prevalence floor or undefined kappa
};

// Per-concept binary agreement over the sheet. min_prevalence drops concepts
// whose positives (either annotator) fall below the floor; 0 keeps all.
AgreementReport agreement_by_concept(const std::vector<DualAnnotation>& duals,
                                     long min_prevalence = 0);

struct PrfRow {
    std::string concept_name;
    long predicted = 0;
    long correct = 0;
    long support = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_defined = true;  // false when the concept was never predicted
    bool recall_defined = true;     // false when support is zero
};

struct PrfReport {
    std::vector<PrfRow> per_concept;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    int excluded_from_macro = 0;
};

// Model label sets against adjudicated references; rows must align by verse
// ref. exclude_below drops rare concepts (support + predictions) from the
// macro means, mirroring the agreement report's floor.
PrfReport precision_recall_f1(const std::vector<std::pair<VerseRef, std::set<Concept>>>& predictions,
                              const std::vector<AdjudicatedReference>& reference,
                              long exclude_below = 0);

// Fraction of verses where both annotators endorse the abstention decision.
double abstention_appropriateness(const std::vector<DualAnnotation>& duals);

// p' = sigmoid(logit(p) / T); T = 1 is the identity.
double temperature_scale(double p, double temperature);

struct TemperatureFit {
    double temperature = 1.0;
    double nll = 0.0;
    bool at_boundary = false;  // degenerate correctness pushed the fit to a bound
};

// Minimizes binary NLL over log T in [ln 0.05, ln 20] by golden-section
// search to 1e-6. Confidences must lie strictly inside (0,1).
TemperatureFit fit_temperature(std::span<const double> confidences,
                               const std::vector<bool>& correctness);

struct CalibrationBin {
    double lo = 0.0;
    double hi = 0.0;
    long count = 0;
    double mean_conf = 0.0;
    double accuracy = 0.0;
    double gap = 0.0;
};

struct EceReport {
    double ece = 0.0;
    std::vector<CalibrationBin> bins;  // empty bins omitted
};

// Fixed-width bins over [0,1), right-open except the last.
EceReport ece(std::span<const double> confidences, const std::vector<bool>& correctness,
              double bin_width = 0.1);

struct CoverageRow {
    double tau = 0.0;
    long retained = 0;
    double coverage = 0.0;
    double accuracy = 0.0;
    double risk = 0.0;
    bool defined = true;  // false when nothing is retained
};

// thresholds must be sorted ascending.
std::vector<CoverageRow> coverage_risk(std::span<const double> confidences,
                                       const std::vector<bool>& correctness,
                                       std::span<const double> thresholds);

}  // namespace eigenmood
