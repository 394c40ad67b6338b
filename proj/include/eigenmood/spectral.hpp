#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eigenmood/aggregate.hpp"
#include "eigenmood/verse.hpp"

namespace eigenmood {

// Weighted undirected concept co-activation graph: symmetric adjacency,
// zero diagonal, nonnegative weights.
struct CooccurrenceGraph {
    std::vector<std::string> concepts;
    std::vector<double> adjacency;  // row-major n x n

    std::size_t size() const { return concepts.size(); }
    double& w(std::size_t i, std::size_t j) { return adjacency[i * size() + j]; }
    double w(std::size_t i, std::size_t j) const { return adjacency[i * size() + j]; }
};

enum class LaplacianKind { Unnormalized, SymmetricNormalized };

std::string_view laplacian_kind_name(LaplacianKind kind);

// Full symmetric eigendecomposition: ascending eigenvalues, orthonormal
// eigenvectors stored as columns, each sign-canonicalized so its
// largest-magnitude entry is nonnegative (ties resolved by lowest index).
struct SymmetricEigen {
    std::size_t n = 0;
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // row-major n x n; column k is the k-th eigenvector

    double component(std::size_t k, std::size_t i) const { return vectors[i * n + k]; }
    std::vector<double> eigenvector(std::size_t k) const {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = component(k, i);
        return v;
    }
};

struct SpectralModel {
    CooccurrenceGraph graph;
    LaplacianKind kind = LaplacianKind::Unnormalized;
    SymmetricEigen eigen;

    std::optional<std::size_t> concept_col(std::string_view name) const {
        for (std::size_t i = 0; i < graph.concepts.size(); ++i)
            if (graph.concepts[i] == name) return i;
        return std::nullopt;
    }
};

// Projection of a baseline-centered poet distribution onto the non-trivial
// modes, k = 1..K.
struct EigenmoodCoords {
    std::string poet;
    std::vector<double> coords;
};

struct VerseAxisScore {
    VerseRef ref;
    int axis = 0;
    double score = 0.0;
    std::vector<LabelInstance> contributing;  // labels inside the model's concept set
};

// W[c,d] accumulates (p_c + p_d)/2 per co-activated pair under confidence
// weighting, or 1 per pair under uniform weighting; thresholds drop
// instances before pairing.
CooccurrenceGraph build_cooccurrence(const Corpus& corpus,
                                     const std::vector<std::string>& concepts,
                                     const WeightPolicy& policy);

// Concepts whose baseline share reaches min_share, original order kept.
std::vector<std::string> filter_concepts(const ConceptDistribution& baseline,
                                         double min_share = 1e-3);

std::vector<double> laplacian(const CooccurrenceGraph& graph, LaplacianKind kind);

// Cyclic Jacobi rotations; converged when the off-diagonal Frobenius mass
// falls below 1e-12 times the matrix Frobenius norm. Throws DataError on
// non-symmetric input (1e-12 relative).
SymmetricEigen eigendecompose(const std::vector<double>& matrix, std::size_t n);

SpectralModel build_spectral_model(const Corpus& corpus, const ConceptDistribution& baseline,
                                   const WeightPolicy& policy, LaplacianKind kind,
                                   double min_share = 1e-3);

// Restricts (p - baseline) to the model's concepts without renormalizing,
// then projects onto eigenvectors 1..k_max.
EigenmoodCoords embed_poet(const ConceptDistribution& p, const ConceptDistribution& baseline,
                           const SpectralModel& model, std::size_t k_max);

VerseAxisScore score_verse(const AnnotatedVerse& v, const SpectralModel& model, int axis);

enum class Direction { Positive, Negative, Absolute };

// Extreme-scoring verses along one axis; abstained verses never enter the
// pool. Ties break by (poet, line).
std::vector<VerseAxisScore> retrieve_extremes(const Corpus& corpus, const SpectralModel& model,
                                              int axis, Direction direction, std::size_t top_n);

struct LabelHit {
    VerseRef ref;
    double confidence = 0.0;
};

std::vector<LabelHit> retrieve_by_label(const Corpus& corpus, Concept c, std::size_t top_n);

// Pearson correlation of two equally sized vectors (used for basis
// stability and mode matching diagnostics).
double vector_correlation(const std::vector<double>& a, const std::vector<double>& b);

struct ModeMatch {
    std::size_t axis = 0;          // axis in the reference model
    std::size_t matched_axis = 0;  // best-matching axis in the other model
    double abs_correlation = 0.0;
};

// Greedy matching of non-trivial modes between two models over the same
// concept set, by maximal absolute eigenvector correlation.
std::vector<ModeMatch> match_modes(const SpectralModel& reference, const SpectralModel& other,
                                   std::size_t k_max);

}  // namespace eigenmood
