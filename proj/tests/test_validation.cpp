#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "eigenmood/validation.hpp"
#include "test_support.hpp"

using namespace eigenmood;

namespace {

// Dual-annotation sheet with per-concept contingency counts chosen to
// reproduce the published two-annotator agreement study: (pos_a, pos_b,
// both-positive) per concept over 500 verses, plus model predictions with
// known correct counts against the union reference.
struct ConceptPlan {
    Concept label;
    long pos_a, pos_b, both;
    long predicted, correct;
};

const std::vector<ConceptPlan> kPlan = {
    {Concept::AmbivalentAttachment, 16, 20, 13, 21, 15},
    {Concept::EmotionalDependency, 74, 77, 70, 81, 70},
    {Concept::Idealization, 5, 2, 1, 3, 2},
    {Concept::IdentityFragmentation, 24, 24, 20, 27, 19},
    {Concept::InternalProjection, 19, 17, 14, 18, 16},
    {Concept::Melancholia, 109, 108, 99, 132, 105},
    {Concept::RomanticObsession, 68, 68, 62, 80, 67},
    {Concept::SelfDestructiveIdealization, 37, 31, 28, 41, 34},
    {Concept::SpiritualNarcissism, 27, 27, 20, 34, 26},
};

constexpr long kSheetSize = 500;

struct StudyFixture {
    std::vector<DualAnnotation> duals;
    std::vector<std::pair<VerseRef, std::set<Concept>>> predictions;
    std::vector<AdjudicatedReference> references;
};

StudyFixture build_study() {
    StudyFixture fx;
    for (long i = 0; i < kSheetSize; ++i) {
        DualAnnotation d;
        d.ref = {"sample", static_cast<int>(i + 1)};
        // 428 of 500 verses get unanimous abstention endorsement
        d.a_abstain_ok = i < 428 || (i % 2 == 0);
        d.b_abstain_ok = i < 428;
        fx.duals.push_back(std::move(d));
        fx.predictions.emplace_back(VerseRef{"sample", static_cast<int>(i + 1)},
                                    std::set<Concept>{});
    }
    for (const auto& plan : kPlan) {
        const long a_only = plan.pos_a - plan.both;
        const long b_only = plan.pos_b - plan.both;
        for (long i = 0; i < plan.both + a_only; ++i)
            fx.duals[static_cast<std::size_t>(i)].annotator_a.insert(plan.label);
        for (long i = 0; i < plan.both; ++i)
            fx.duals[static_cast<std::size_t>(i)].annotator_b.insert(plan.label);
        for (long i = plan.both + a_only; i < plan.both + a_only + b_only; ++i)
            fx.duals[static_cast<std::size_t>(i)].annotator_b.insert(plan.label);
        // predictions: `correct` hits inside the union support, the rest on
        // verses no annotator marked (indices from 400 keep clear of support)
        for (long i = 0; i < plan.correct; ++i)
            fx.predictions[static_cast<std::size_t>(i)].second.insert(plan.label);
        for (long i = 0; i < plan.predicted - plan.correct; ++i)
            fx.predictions[static_cast<std::size_t>(400 + i)].second.insert(plan.label);
    }
    for (const auto& d : fx.duals) fx.references.push_back(adjudicate(d));
    return fx;
}

}  // namespace

TEST_CASE("union adjudication is commutative and idempotent") {
    DualAnnotation d;
    d.annotator_a = {Concept::Melancholia};
    d.annotator_b = {Concept::RomanticObsession};
    CHECK(adjudicate(d).labels ==
          std::set<Concept>{Concept::Melancholia, Concept::RomanticObsession});

    DualAnnotation swapped;
    swapped.annotator_a = d.annotator_b;
    swapped.annotator_b = d.annotator_a;
    CHECK(adjudicate(swapped).labels == adjudicate(d).labels);

    DualAnnotation same;
    same.annotator_a = same.annotator_b = {Concept::Melancholia};
    CHECK(adjudicate(same).labels == std::set<Concept>{Concept::Melancholia});

    DualAnnotation empty;
    CHECK(adjudicate(empty).labels.empty());
}

TEST_CASE("kappa on hand-counted 2x2 tables") {
    const std::vector<bool> a = {true, true, false, false};
    const std::vector<bool> b = {true, false, true, false};
    const auto k = cohen_kappa(a, b);
    CHECK(k.p_o == doctest::Approx(0.5));
    CHECK(k.p_e == doctest::Approx(0.5));
    CHECK(k.kappa == doctest::Approx(0.0));

    const std::vector<bool> mixed_a = {true, false, true, false, true};
    CHECK(cohen_kappa(mixed_a, mixed_a).kappa == doctest::Approx(1.0));

    // degenerate marginals: chance agreement is 1
    const std::vector<bool> none(4, false);
    CHECK_FALSE(cohen_kappa(none, none).defined);
}

TEST_CASE("agreement fixture reproduces the published per-concept kappas") {
    const auto fx = build_study();
    const auto report = agreement_by_concept(fx.duals);
    REQUIRE(report.per_concept.size() == kConceptCount);

    const std::vector<double> expected_kappa = {0.711982, 0.914202, 0.281609,
                                                0.824930, 0.769506, 0.888177,
                                                0.897876, 0.810761, 0.725942};
    const std::vector<double> expected_po = {0.980, 0.978, 0.990, 0.984, 0.984,
                                             0.962, 0.976, 0.976, 0.972};
    for (std::size_t c = 0; c < kConceptCount; ++c) {
        const auto& row = report.per_concept[c];
        CHECK(row.kappa.p_o == doctest::Approx(expected_po[c]).epsilon(1e-12));
        CHECK(row.kappa.kappa == doctest::Approx(expected_kappa[c]).epsilon(1e-4));
    }
    CHECK(report.macro_kappa == doctest::Approx(0.758331603172019).epsilon(1e-9));

    SUBCASE("rare-label exclusion reproduces the published macro") {
        const auto excl = agreement_by_concept(fx.duals, 10);
        CHECK(excl.excluded == 1);
        CHECK(excl.macro_kappa == doctest::Approx(0.817921904143235).epsilon(1e-9));
    }
}

TEST_CASE("PRF fixture reproduces the published per-concept and macro scores") {
    const auto fx = build_study();
    const auto report = precision_recall_f1(fx.predictions, fx.references);
    REQUIRE(report.per_concept.size() == kConceptCount);

    for (std::size_t c = 0; c < kConceptCount; ++c) {
        const auto& row = report.per_concept[c];
        const auto& plan = kPlan[c];
        CHECK(row.predicted == plan.predicted);
        CHECK(row.correct == plan.correct);
        CHECK(row.support == plan.pos_a + plan.pos_b - plan.both);
        CHECK(row.precision ==
              doctest::Approx(static_cast<double>(plan.correct) / plan.predicted).epsilon(1e-12));
    }
    // melancholia row mirrors the published 0.795 / 0.890 / 0.840 at support 118
    const auto& mel = report.per_concept[static_cast<std::size_t>(Concept::Melancholia)];
    CHECK(mel.precision == doctest::Approx(0.795).epsilon(1e-3));
    CHECK(mel.recall == doctest::Approx(0.890).epsilon(1e-3));
    CHECK(mel.f1 == doctest::Approx(0.840).epsilon(1e-3));
    CHECK(mel.support == 118);

    CHECK(report.macro_precision == doctest::Approx(0.784963469433287).epsilon(1e-9));
    CHECK(report.macro_recall == doctest::Approx(0.740610081035343).epsilon(1e-9));
    CHECK(report.macro_f1 == doctest::Approx(0.755079019262026).epsilon(1e-9));

    SUBCASE("rare-label exclusion reproduces the published macros") {
        const auto excl = precision_recall_f1(fx.predictions, fx.references, 10);
        CHECK(excl.excluded_from_macro == 1);
        CHECK(excl.macro_precision == doctest::Approx(0.799750569779115).epsilon(1e-9));
        CHECK(excl.macro_recall == doctest::Approx(0.791519674498094).epsilon(1e-9));
        CHECK(excl.macro_f1 == doctest::Approx(0.793908341114223).epsilon(1e-9));
    }
}

TEST_CASE("perfect predictions give all-ones metrics") {
    const auto fx = build_study();
    std::vector<std::pair<VerseRef, std::set<Concept>>> perfect;
    for (const auto& ref : fx.references) perfect.emplace_back(ref.ref, ref.labels);
    const auto report = precision_recall_f1(perfect, fx.references);
    for (const auto& row : report.per_concept) {
        if (!row.precision_defined) continue;
        CHECK(row.precision == 1.0);
        CHECK(row.recall == 1.0);
        CHECK(row.f1 == 1.0);
    }
}

TEST_CASE("zero-prediction concepts are flagged and excluded from the macro") {
    std::vector<std::pair<VerseRef, std::set<Concept>>> preds;
    std::vector<AdjudicatedReference> refs;
    for (int i = 1; i <= 4; ++i) {
        preds.emplace_back(VerseRef{"p", i}, std::set<Concept>{Concept::Melancholia});
        refs.push_back({{"p", i}, {Concept::Melancholia, Concept::Idealization}});
    }
    const auto report = precision_recall_f1(preds, refs);
    const auto& ideal = report.per_concept[static_cast<std::size_t>(Concept::Idealization)];
    CHECK_FALSE(ideal.precision_defined);
    CHECK(ideal.support == 4);
    CHECK(report.excluded_from_macro >= 1);
    // the macro ignores undefined rows entirely
    CHECK(report.macro_precision == doctest::Approx(1.0));
}

TEST_CASE("misaligned refs raise an error naming offenders") {
    std::vector<std::pair<VerseRef, std::set<Concept>>> preds = {
        {{"p", 1}, {}},
        {{"p", 99}, {}},
    };
    std::vector<AdjudicatedReference> refs = {{{"p", 1}, {}}, {{"p", 2}, {}}};
    CHECK_THROWS_WITH_AS(precision_recall_f1(preds, refs),
                         doctest::Contains("p:99"), DataError);
}

TEST_CASE("abstention appropriateness counts unanimous endorsements") {
    const auto fx = build_study();
    CHECK(abstention_appropriateness(fx.duals) == doctest::Approx(428.0 / 500.0).epsilon(1e-12));

    std::vector<DualAnnotation> all_good(3);
    for (auto& d : all_good) d.a_abstain_ok = d.b_abstain_ok = true;
    CHECK(abstention_appropriateness(all_good) == 1.0);

    std::vector<DualAnnotation> half(2);
    half[0].a_abstain_ok = half[0].b_abstain_ok = true;
    half[1].a_abstain_ok = true;
    CHECK(abstention_appropriateness(half) == 0.5);

    CHECK_THROWS_AS(abstention_appropriateness({}), DataError);
}

TEST_CASE("temperature scaling closed forms") {
    CHECK(temperature_scale(0.7, 0.5) == doctest::Approx(0.8448275862).epsilon(1e-8));
    // T = 1 is the identity
    for (double p : {0.01, 0.3, 0.5, 0.77, 0.99})
        CHECK(std::fabs(temperature_scale(p, 1.0) - p) < 1e-12);
    // strictly monotone in p for any T
    for (double t : {0.2, 0.56, 1.0, 3.0, 15.0}) {
        double prev = 0.0;
        for (double p = 0.05; p < 1.0; p += 0.05) {
            const double scaled = temperature_scale(p, t);
            CHECK(scaled > prev);
            prev = scaled;
        }
    }
}

namespace {

// 10,000 instances at ten confidence levels whose empirical accuracy equals
// the confidence exactly.
void calibrated_sample(std::vector<double>& confs, std::vector<bool>& correct) {
    for (int level = 0; level < 10; ++level) {
        const double p = 0.05 + 0.1 * level;
        const long hits = std::lround(1000.0 * p);
        for (long i = 0; i < 1000; ++i) {
            confs.push_back(p);
            correct.push_back(i < hits);
        }
    }
}

}  // namespace

TEST_CASE("fitting a perfectly calibrated sample recovers T = 1") {
    std::vector<double> confs;
    std::vector<bool> correct;
    calibrated_sample(confs, correct);
    const auto fit = fit_temperature(confs, correct);
    CHECK_FALSE(fit.at_boundary);
    CHECK(std::fabs(fit.temperature - 1.0) < 0.05);

    SUBCASE("grid oracle agrees about the minimum") {
        double best_t = 0.0, best_nll = 1e300;
        for (int i = 0; i <= 2000; ++i) {
            const double t = std::exp(std::log(0.05) +
                                      (std::log(20.0) - std::log(0.05)) * i / 2000.0);
            double nll = 0.0;
            for (std::size_t j = 0; j < confs.size(); ++j) {
                const double p = temperature_scale(confs[j], t);
                nll -= correct[j] ? std::log(p) : std::log1p(-p);
            }
            if (nll < best_nll) {
                best_nll = nll;
                best_t = t;
            }
        }
        CHECK(std::fabs(best_t - fit.temperature) < 0.01);
    }
}

TEST_CASE("degenerate correctness pushes the fit to a flagged boundary") {
    const std::vector<double> confs = {0.6, 0.7, 0.8};
    const std::vector<bool> all_true = {true, true, true};
    const auto fit = fit_temperature(confs, all_true);
    CHECK(fit.at_boundary);
    CHECK(fit.temperature == doctest::Approx(0.05).epsilon(1e-2));

    const std::vector<bool> all_false = {false, false, false};
    CHECK(fit_temperature(confs, all_false).at_boundary);

    const std::vector<double> out_of_range = {1.0};
    CHECK_THROWS_AS(fit_temperature(out_of_range, std::vector<bool>{true}), DataError);
    CHECK_THROWS_AS(fit_temperature(std::vector<double>{}, std::vector<bool>{}), DataError);
}

TEST_CASE("ECE single-bin hand evaluation") {
    const std::vector<double> confs = {0.6, 0.8};
    const std::vector<bool> correct = {true, false};
    const auto report = ece(confs, correct, 1.0);
    REQUIRE(report.bins.size() == 1);
    CHECK(report.bins[0].mean_conf == doctest::Approx(0.7));
    CHECK(report.bins[0].accuracy == doctest::Approx(0.5));
    CHECK(report.ece == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("ECE is zero when every bin is calibrated") {
    const std::vector<double> confs = {1.0, 1.0, 1.0};
    const std::vector<bool> correct = {true, true, true};
    CHECK(ece(confs, correct).ece == doctest::Approx(0.0));

    std::vector<double> c2;
    std::vector<bool> k2;
    calibrated_sample(c2, k2);
    CHECK(ece(c2, k2).ece == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ECE bin edges are right-open with a closed top bin") {
    const std::vector<double> confs = {0.7, 0.69999, 1.0, 0.0};
    const std::vector<bool> correct = {true, true, true, false};
    const auto report = ece(confs, correct, 0.1);
    // 0.7 lands in [0.7,0.8), 0.69999 in [0.6,0.7), 1.0 in [0.9,1.0], 0.0 in [0,0.1)
    REQUIRE(report.bins.size() == 4);
    CHECK(report.bins[0].lo == doctest::Approx(0.0));
    CHECK(report.bins[1].lo == doctest::Approx(0.6));
    CHECK(report.bins[2].lo == doctest::Approx(0.7));
    CHECK(report.bins[3].lo == doctest::Approx(0.9));
    for (const auto& b : report.bins) CHECK(b.count == 1);
}

TEST_CASE("calibration-table fixture matches the published study shape") {
    // per bin: (mean scaled confidence, instances, correct)
    const std::vector<std::tuple<double, long, long>> bins = {
        {0.327, 4, 2},   {0.509, 31, 22},  {0.673, 93, 66},
        {0.751, 55, 42}, {0.843, 151, 124}, {0.944, 103, 98},
    };
    std::vector<double> confs;
    std::vector<bool> correct;
    for (const auto& [conf, count, hits] : bins)
        for (long i = 0; i < count; ++i) {
            confs.push_back(conf);
            correct.push_back(i < hits);
        }
    const auto report = ece(confs, correct, 0.1);
    REQUIRE(report.bins.size() == bins.size());
    CHECK(report.ece == doctest::Approx(0.034508009153318).epsilon(1e-12));
    CHECK(report.bins.back().count == 103);
    CHECK(report.bins.back().mean_conf == doctest::Approx(0.944));
    CHECK(report.bins.back().accuracy == doctest::Approx(0.951456).epsilon(1e-5));

    SUBCASE("coverage-risk over the same instances matches the published rows") {
        const std::vector<double> thresholds = {0.3, 0.5, 0.7, 0.8, 0.9};
        const auto curve = coverage_risk(confs, correct, thresholds);
        REQUIRE(curve.size() == 5);
        CHECK(curve[0].retained == 437);
        CHECK(curve[0].coverage == doctest::Approx(1.0));
        CHECK(curve[0].accuracy == doctest::Approx(0.810).epsilon(1e-3));
        CHECK(curve[1].retained == 433);
        CHECK(curve[2].retained == 309);
        CHECK(curve[2].accuracy == doctest::Approx(0.854).epsilon(1e-3));
        CHECK(curve[3].retained == 254);
        CHECK(curve[4].retained == 103);
        CHECK(curve[4].coverage == doctest::Approx(0.236).epsilon(1e-3));
        CHECK(curve[4].accuracy == doctest::Approx(0.951).epsilon(1e-3));
        CHECK(curve[4].risk == doctest::Approx(0.049).epsilon(1e-2));
        for (std::size_t i = 1; i < curve.size(); ++i)
            CHECK(curve[i].coverage <= curve[i - 1].coverage);
    }
}

TEST_CASE("coverage-risk hand count and edge handling") {
    const std::vector<double> confs = {0.4, 0.6, 0.8, 0.9};
    const std::vector<bool> correct = {false, true, true, true};
    const std::vector<double> thresholds = {0.1, 0.7, 0.95};
    const auto curve = coverage_risk(confs, correct, thresholds);
    CHECK(curve[0].coverage == doctest::Approx(1.0));  // below the minimum confidence
    CHECK(curve[1].coverage == doctest::Approx(0.5));
    CHECK(curve[1].risk == doctest::Approx(0.0));
    CHECK_FALSE(curve[2].defined);

    const std::vector<double> unsorted = {0.9, 0.1};
    CHECK_THROWS_AS(coverage_risk(confs, correct, unsorted), DataError);
}

TEST_CASE("coverage is non-increasing in tau on random inputs") {
    std::mt19937_64 eng(83);
    for (int round = 0; round < 50; ++round) {
        const std::size_t n = 1 + eng() % 200;
        std::vector<double> confs(n);
        std::vector<bool> correct(n);
        for (std::size_t i = 0; i < n; ++i) {
            confs[i] = static_cast<double>(eng() % 1001) / 1000.0;
            correct[i] = eng() % 2;
        }
        std::vector<double> thresholds;
        for (int t = 0; t <= 20; ++t) thresholds.push_back(t * 0.05);
        const auto curve = coverage_risk(confs, correct, thresholds);
        for (std::size_t i = 1; i < curve.size(); ++i)
            CHECK(curve[i].coverage <= curve[i - 1].coverage + 1e-15);
    }
}

TEST_CASE("default strata follow the confidence-regime boundaries") {
    const auto strata = default_strata();
    REQUIRE(strata.size() == 4);
    AnnotatedVerse v;
    v.abstain = true;
    CHECK(strata[0].contains(v));
    v.abstain = false;
    v.labels = {{Concept::Melancholia, 0.69}};
    CHECK(strata[1].contains(v));
    v.labels = {{Concept::Melancholia, 0.7}};
    CHECK(strata[2].contains(v));  // closed lower edge of medium
    v.labels = {{Concept::Melancholia, 0.79}};
    CHECK(strata[2].contains(v));
    v.labels = {{Concept::Melancholia, 0.8}};
    CHECK(strata[3].contains(v));  // closed lower edge of high
}

TEST_CASE("largest-remainder allocation against hand-computed oracles") {
    // populations 50/30/20, total 10 -> exact shares 5/3/2
    CHECK(largest_remainder_allocation({50, 30, 20}, 10) == std::vector<long>{5, 3, 2});
    // empty stratum redistributes: shares 25*(7/10)=17.5 -> 18, 7.5 -> 7
    CHECK(largest_remainder_allocation({70, 0, 30}, 25) == std::vector<long>{18, 0, 7});
    // caps force spill-over: stratum of 2 cannot take its 5-seat share
    CHECK(largest_remainder_allocation({2, 6, 4}, 10) == std::vector<long>{2, 5, 3});
    CHECK(largest_remainder_allocation({3, 3}, 6) == std::vector<long>{3, 3});
    CHECK_THROWS_AS(largest_remainder_allocation({2, 2}, 5), DataError);
}

TEST_CASE("stratified sampling is deterministic, covers strata, and respects totals") {
    std::mt19937_64 eng(97);
    const Corpus corpus = emtest::random_corpus(eng, 4, 50);
    const long total = static_cast<long>(corpus.verses.size() * 3 / 4);
    const auto strata = default_strata();

    const auto s1 = stratified_sample(corpus, total, strata, 42);
    const auto s2 = stratified_sample(corpus, total, strata, 42);
    CHECK(s1 == s2);

    SUBCASE("whole-corpus total returns every verse") {
        const auto all = stratified_sample(corpus, static_cast<long>(corpus.verses.size()),
                                           strata, 42);
        CHECK(all.size() == corpus.verses.size());
    }
    SUBCASE("over-large totals are rejected") {
        CHECK_THROWS_AS(
            stratified_sample(corpus, static_cast<long>(corpus.verses.size()) + 1, strata, 42),
            DataError);
    }
}

TEST_CASE("sampling tops up concept coverage when available") {
    // 40 melancholia verses plus a single idealization carrier: a small
    // sample must still include the rare concept
    Corpus corpus;
    corpus.poets = {"p"};
    for (int i = 0; i < 40; ++i) {
        AnnotatedVerse v;
        v.poet = "p";
        v.source_line = i + 1;
        v.labels = {{Concept::Melancholia, 0.75}};
        corpus.verses.push_back(v);
    }
    AnnotatedVerse rare;
    rare.poet = "p";
    rare.source_line = 41;
    rare.labels = {{Concept::Idealization, 0.9}};
    corpus.verses.push_back(rare);

    const auto sample = stratified_sample(corpus, 10, default_strata(), 7);
    bool has_rare = false;
    for (const auto& ref : sample)
        if (ref.line == 41) has_rare = true;
    CHECK(has_rare);
    CHECK(sample.size() == 10);
}
