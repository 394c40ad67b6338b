#include <cmath>
#include <random>

#include "doctest.h"
#include "eigenmood/aggregate.hpp"
#include "test_support.hpp"

using namespace eigenmood;

namespace {

Corpus toy_corpus() {
    // One poet: {A:0.5, B:0.5}, one abstained verse, {A:0.3}.
    Corpus corpus;
    corpus.poets = {"p"};
    AnnotatedVerse v1;
    v1.poet = "p";
    v1.source_line = 1;
    v1.labels = {{Concept::AmbivalentAttachment, 0.5}, {Concept::EmotionalDependency, 0.5}};
    AnnotatedVerse v2;
    v2.poet = "p";
    v2.source_line = 2;
    v2.abstain = true;
    AnnotatedVerse v3;
    v3.poet = "p";
    v3.source_line = 3;
    v3.labels = {{Concept::AmbivalentAttachment, 0.3}};
    corpus.verses = {v1, v2, v3};
    return corpus;
}

}  // namespace

TEST_CASE("confidence mass sums independent records") {
    const auto m = poet_concept_mass(toy_corpus(), WeightPolicy{});
    CHECK(m.at(0, 0) == doctest::Approx(0.8).epsilon(1e-12));  // ambivalent_attachment
    CHECK(m.at(0, 1) == doctest::Approx(0.5).epsilon(1e-12));  // emotional_dependency
    for (std::size_t c = 2; c < kConceptCount; ++c) CHECK(m.at(0, c) == 0.0);
}

TEST_CASE("a poet without verses keeps an all-zero row") {
    Corpus corpus = toy_corpus();
    corpus.poets.push_back("silent");
    const auto m = poet_concept_mass(corpus, WeightPolicy{});
    for (std::size_t c = 0; c < kConceptCount; ++c) CHECK(m.at(1, c) == 0.0);
}

TEST_CASE("aggregation equals brute-force per-record summation") {
    std::mt19937_64 eng(99);
    const std::vector<WeightPolicy> policies = {
        {WeightKind::Confidence, std::nullopt}, {WeightKind::Confidence, 0.5},
        {WeightKind::Confidence, 0.7},          {WeightKind::Uniform, std::nullopt},
        {WeightKind::Uniform, 0.5},
    };
    for (int round = 0; round < 40; ++round) {
        const Corpus corpus = emtest::random_corpus(eng);
        for (const auto& policy : policies) {
            const auto m = poet_concept_mass(corpus, policy);
            CHECK(emtest::max_relative_error(m, emtest::brute_force_mass(corpus, policy, false)) <
                  1e-9);
            const auto aug = augment_with_abstain(corpus, policy);
            CHECK(emtest::max_relative_error(aug, emtest::brute_force_mass(corpus, policy, true)) <
                  1e-9);
        }
    }
}

TEST_CASE("raising the threshold never increases any entry") {
    std::mt19937_64 eng(5);
    for (int round = 0; round < 20; ++round) {
        const Corpus corpus = emtest::random_corpus(eng);
        WeightPolicy lo{WeightKind::Confidence, 0.3};
        WeightPolicy hi{WeightKind::Confidence, 0.8};
        const auto mlo = poet_concept_mass(corpus, lo);
        const auto mhi = poet_concept_mass(corpus, hi);
        for (std::size_t i = 0; i < mlo.mass.size(); ++i) CHECK(mhi.mass[i] <= mlo.mass[i] + 1e-15);
    }
}

TEST_CASE("uniform mass equals the retained instance count exactly") {
    std::mt19937_64 eng(6);
    const Corpus corpus = emtest::random_corpus(eng);
    WeightPolicy uniform{WeightKind::Uniform, 0.4};
    const auto m = poet_concept_mass(corpus, uniform);
    for (std::size_t p = 0; p < m.poets.size(); ++p) {
        long count = 0;
        for (const auto& v : corpus.verses) {
            if (v.poet != m.poets[p] || v.abstain) continue;
            for (const auto& li : v.labels)
                if (li.confidence >= 0.4) ++count;
        }
        double row = 0.0;
        for (std::size_t c = 0; c < kConceptCount; ++c) row += m.at(p, c);
        CHECK(row == static_cast<double>(count));
    }
}

TEST_CASE("smoothing turns an all-zero row into the uniform distribution") {
    const auto d = to_distribution(ontology_names(), std::vector<double>(kConceptCount, 0.0));
    for (double p : d.probs) CHECK(std::fabs(p - 1.0 / 9.0) < 1e-12);
}

TEST_CASE("near-delta rows stay strictly positive and unit sum") {
    const auto d = to_distribution({"a", "b"}, {1.0, 0.0});
    CHECK(d.probs[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(d.probs[1] > 0.0);
    CHECK(d.probs[0] + d.probs[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("distributions are scale invariant up to smoothing") {
    std::mt19937_64 eng(8);
    for (int round = 0; round < 50; ++round) {
        std::vector<double> row(kConceptCount);
        for (auto& x : row) x = 0.1 + static_cast<double>(eng() % 1000) / 100.0;
        const double k = 0.5 + static_cast<double>(eng() % 50) / 10.0;
        std::vector<double> scaled = row;
        for (auto& x : scaled) x *= k;
        const auto d1 = to_distribution(ontology_names(), row);
        const auto d2 = to_distribution(ontology_names(), scaled);
        for (std::size_t c = 0; c < kConceptCount; ++c)
            CHECK(std::fabs(d1.probs[c] - d2.probs[c]) < 1e-6);
    }
}

TEST_CASE("single-poet baseline equals that poet's distribution") {
    const auto m = poet_concept_mass(toy_corpus(), WeightPolicy{});
    const auto baseline = global_baseline(m);
    const auto own = poet_distribution(m, 0);
    for (std::size_t c = 0; c < kConceptCount; ++c)
        CHECK(baseline.probs[c] == doctest::Approx(own.probs[c]).epsilon(1e-12));
}

TEST_CASE("two identical rows pool to the same distribution") {
    PoetConceptMatrix m;
    m.poets = {"a", "b"};
    m.concepts = ontology_names();
    m.mass.assign(2 * kConceptCount, 0.0);
    for (std::size_t c = 0; c < kConceptCount; ++c) {
        m.at(0, c) = static_cast<double>(c + 1);
        m.at(1, c) = static_cast<double>(c + 1);
    }
    const auto baseline = global_baseline(m);
    const auto row = poet_distribution(m, 0);
    for (std::size_t c = 0; c < kConceptCount; ++c)
        CHECK(baseline.probs[c] == doctest::Approx(row.probs[c]).epsilon(1e-12));
}

TEST_CASE("distribution law: unit sum and strict positivity") {
    std::mt19937_64 eng(21);
    for (int round = 0; round < 200; ++round) {
        std::vector<double> row(kConceptCount, 0.0);
        for (auto& x : row)
            if (eng() % 3) x = static_cast<double>(eng() % 10000) / 7.0;
        const auto d = to_distribution(ontology_names(), row);
        double sum = 0.0;
        for (double p : d.probs) {
            CHECK(p > 0.0);
            sum += p;
        }
        CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("lifts subtract elementwise and sum to zero") {
    const auto p = to_distribution({"a", "b"}, {0.6, 0.4});
    const auto q = to_distribution({"a", "b"}, {0.5, 0.5});
    const auto lift = concept_lift(p, q);
    CHECK(lift.delta[0] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(lift.delta[1] == doctest::Approx(-0.1).epsilon(1e-9));
    CHECK(std::fabs(lift.delta[0] + lift.delta[1]) < 1e-12);

    const auto zero = concept_lift(p, p);
    for (double d : zero.delta) CHECK(d == 0.0);

    CHECK_THROWS_AS(concept_lift(p, to_distribution({"a", "c"}, {0.5, 0.5})), DataError);

    const auto sorted = lift.sorted();
    CHECK(sorted.front().second >= sorted.back().second);
}

TEST_CASE("abstention augmentation adds a unit-mass trailing column") {
    Corpus corpus = toy_corpus();  // one abstained verse out of three
    const auto aug = augment_with_abstain(corpus, WeightPolicy{});
    CHECK(aug.concepts.size() == kConceptCount + 1);
    CHECK(aug.concepts.back() == std::string(kAbstainName));
    CHECK(aug.at(0, kConceptCount) == 1.0);

    SUBCASE("no abstentions means zero abstain mass") {
        corpus.verses.erase(corpus.verses.begin() + 1);
        const auto none = augment_with_abstain(corpus, WeightPolicy{});
        CHECK(none.at(0, kConceptCount) == 0.0);
    }
}

TEST_CASE("abstain share follows unit accounting under uniform weighting") {
    std::mt19937_64 eng(31);
    for (int round = 0; round < 20; ++round) {
        const Corpus corpus = emtest::random_corpus(eng);
        const auto aug = augment_with_abstain(corpus, WeightPolicy{WeightKind::Uniform, {}});
        for (std::size_t p = 0; p < aug.poets.size(); ++p) {
            double label_mass = 0.0;
            for (std::size_t c = 0; c < kConceptCount; ++c) label_mass += aug.at(p, c);
            const double abstain_mass = aug.at(p, kConceptCount);
            if (label_mass + abstain_mass == 0.0) continue;
            const auto dist = poet_distribution(aug, p);
            const double expected = abstain_mass / (abstain_mass + label_mass);
            CHECK(std::fabs(dist.probs.back() - expected) < 1e-6);
        }
    }
}
