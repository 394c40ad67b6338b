#include "eigenmood/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace eigenmood {

std::string weight_policy_name(const WeightPolicy& policy) {
    std::string name = policy.kind == WeightKind::Uniform ? "uniform" : "confidence";
    if (policy.threshold) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), ",tau=%g", *policy.threshold);
        name += buf;
    }
    return name;
}

std::vector<std::pair<std::string, double>> LiftProfile::sorted() const {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(concepts.size());
    for (std::size_t i = 0; i < concepts.size(); ++i) out.emplace_back(concepts[i], delta[i]);
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

namespace {

PoetConceptMatrix build_mass(const Corpus& corpus, const WeightPolicy& policy,
                             bool with_abstain) {
    PoetConceptMatrix m;
    m.poets = corpus.poets;
    m.concepts = ontology_names(with_abstain);
    m.includes_abstain = with_abstain;
    m.mass.assign(m.poets.size() * m.concepts.size(), 0.0);

    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < m.poets.size(); ++i) row_of[m.poets[i]] = i;

    // Accumulation follows corpus order so repeated runs are bit-stable.
    const std::size_t abstain_col = kConceptCount;
    for (const auto& v : corpus.verses) {
        const std::size_t row = row_of.at(v.poet);
        if (v.abstain) {
            if (with_abstain) m.at(row, abstain_col) += 1.0;
            continue;
        }
        for (const auto& li : v.labels)
            m.at(row, static_cast<std::size_t>(li.label)) += policy.instance_mass(li.confidence);
    }
    return m;
}

}  // namespace

PoetConceptMatrix poet_concept_mass(const Corpus& corpus, const WeightPolicy& policy) {
    return build_mass(corpus, policy, /*with_abstain=*/false);
}

PoetConceptMatrix augment_with_abstain(const Corpus& corpus, const WeightPolicy& policy) {
    return build_mass(corpus, policy, /*with_abstain=*/true);
}

ConceptDistribution to_distribution(const std::vector<std::string>& concepts,
                                    const std::vector<double>& mass_row, double epsilon) {
    if (concepts.size() != mass_row.size())
        throw DataError("mass row length does not match concept set");
    ConceptDistribution d;
    d.concepts = concepts;
    d.epsilon = epsilon;
    double total = 0.0;
    for (double x : mass_row) total += x + epsilon;
    d.probs.reserve(mass_row.size());
    for (double x : mass_row) d.probs.push_back((x + epsilon) / total);
    return d;
}

ConceptDistribution poet_distribution(const PoetConceptMatrix& m, std::size_t poet_row,
                                      double epsilon) {
    return to_distribution(m.concepts, m.row(poet_row), epsilon);
}

ConceptDistribution global_baseline(const PoetConceptMatrix& m, double epsilon) {
    if (m.poets.empty()) throw DataError("baseline of an empty matrix");
    const std::size_t cols = m.concepts.size();
    std::vector<double> pooled(cols, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < m.poets.size(); ++i) {
        for (std::size_t c = 0; c < cols; ++c) {
            pooled[c] += m.at(i, c) + epsilon;
            total += m.at(i, c) + epsilon;
        }
    }
    ConceptDistribution d;
    d.concepts = m.concepts;
    d.epsilon = epsilon;
    d.probs.reserve(cols);
    for (std::size_t c = 0; c < cols; ++c) d.probs.push_back(pooled[c] / total);
    return d;
}

LiftProfile concept_lift(const ConceptDistribution& poet, const ConceptDistribution& baseline) {
    if (poet.concepts != baseline.concepts)
        throw DataError("concept lift requires identical concept sets");
    LiftProfile lift;
    lift.concepts = poet.concepts;
    lift.delta.reserve(poet.probs.size());
    for (std::size_t i = 0; i < poet.probs.size(); ++i)
        lift.delta.push_back(poet.probs[i] - baseline.probs[i]);
    return lift;
}

}  // namespace eigenmood
