#include "eigenmood/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>

namespace eigenmood {

std::string_view laplacian_kind_name(LaplacianKind kind) {
    return kind == LaplacianKind::Unnormalized ? "unnorm" : "sym";
}

CooccurrenceGraph build_cooccurrence(const Corpus& corpus,
                                     const std::vector<std::string>& concepts,
                                     const WeightPolicy& policy) {
    if (concepts.empty()) throw DataError("co-occurrence over an empty concept set");
    CooccurrenceGraph g;
    g.concepts = concepts;
    g.adjacency.assign(concepts.size() * concepts.size(), 0.0);

    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < concepts.size(); ++i) col[concepts[i]] = i;

    std::vector<std::pair<std::size_t, double>> active;
    for (const auto& v : corpus.verses) {
        if (v.abstain) continue;
        active.clear();
        for (const auto& li : v.labels) {
            if (!policy.retains(li.confidence)) continue;
            auto it = col.find(std::string(concept_name(li.label)));
            if (it != col.end()) active.emplace_back(it->second, li.confidence);
        }
        for (std::size_t a = 0; a < active.size(); ++a) {
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                const double wgt = policy.kind == WeightKind::Uniform
                                       ? 1.0
                                       : 0.5 * (active[a].second + active[b].second);
                g.w(active[a].first, active[b].first) += wgt;
                g.w(active[b].first, active[a].first) += wgt;
            }
        }
    }
    return g;
}

std::vector<std::string> filter_concepts(const ConceptDistribution& baseline, double min_share) {
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < baseline.concepts.size(); ++i)
        if (baseline.probs[i] >= min_share) kept.push_back(baseline.concepts[i]);
    if (kept.empty()) throw DataError("every concept fell below the baseline share floor");
    return kept;
}

std::vector<double> laplacian(const CooccurrenceGraph& graph, LaplacianKind kind) {
    const std::size_t n = graph.size();
    std::vector<double> degree(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) degree[i] += graph.w(i, j);

    std::vector<double> L(n * n, 0.0);
    if (kind == LaplacianKind::Unnormalized) {
        for (std::size_t i = 0; i < n; ++i) {
            L[i * n + i] = degree[i];
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) L[i * n + j] = -graph.w(i, j);
        }
        return L;
    }
    // Symmetric normalized; rows and columns of degree-0 nodes stay zero.
    for (std::size_t i = 0; i < n; ++i) {
        if (degree[i] <= 0.0) continue;
        L[i * n + i] = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || degree[j] <= 0.0) continue;
            L[i * n + j] = -graph.w(i, j) / std::sqrt(degree[i] * degree[j]);
        }
    }
    return L;
}

namespace {

double frobenius(const std::vector<double>& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

double off_diagonal_mass(const std::vector<double>& a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) s += a[i * n + j] * a[i * n + j];
    return std::sqrt(s);
}

void canonicalize_sign(SymmetricEigen& e) {
    for (std::size_t k = 0; k < e.n; ++k) {
        std::size_t lead = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < e.n; ++i) {
            const double mag = std::fabs(e.component(k, i));
            if (mag > best) {
                best = mag;
                lead = i;
            }
        }
        if (e.component(k, lead) < 0.0)
            for (std::size_t i = 0; i < e.n; ++i) e.vectors[i * e.n + k] = -e.vectors[i * e.n + k];
    }
}

}  // namespace

SymmetricEigen eigendecompose(const std::vector<double>& matrix, std::size_t n) {
    if (matrix.size() != n * n) throw DataError("matrix size does not match dimension");
    double max_abs = 0.0;
    for (double x : matrix) max_abs = std::max(max_abs, std::fabs(x));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::fabs(matrix[i * n + j] - matrix[j * n + i]) > 1e-12 * std::max(max_abs, 1e-300))
                throw DataError("eigendecomposition requires a symmetric matrix");

    std::vector<double> a = matrix;
    SymmetricEigen e;
    e.n = n;
    e.vectors.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) e.vectors[i * n + i] = 1.0;
    e.values.assign(n, 0.0);
    if (n == 0) return e;

    const double norm = frobenius(a);
    const double target = 1e-12 * norm;
    constexpr int kMaxSweeps = 64;
    int sweep = 0;
    while (norm > 0.0 && off_diagonal_mass(a, n) > target) {
        if (++sweep > kMaxSweeps) throw std::runtime_error("Jacobi sweep limit exceeded");
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a[r * n + p];
                        const double arq = a[r * n + q];
                        a[r * n + p] = arp - s * (arq + tau * arp);
                        a[p * n + r] = a[r * n + p];
                        a[r * n + q] = arq + s * (arp - tau * arq);
                        a[q * n + r] = a[r * n + q];
                    }
                    const double vrp = e.vectors[r * n + p];
                    const double vrq = e.vectors[r * n + q];
                    e.vectors[r * n + p] = vrp - s * (vrq + tau * vrp);
                    e.vectors[r * n + q] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) e.values[i] = a[i * n + i];

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return e.values[x] < e.values[y]; });

    SymmetricEigen sorted;
    sorted.n = n;
    sorted.values.resize(n);
    sorted.vectors.assign(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        sorted.values[k] = e.values[order[k]];
        for (std::size_t i = 0; i < n; ++i) sorted.vectors[i * n + k] = e.vectors[i * n + order[k]];
    }
    canonicalize_sign(sorted);
    return sorted;
}

SpectralModel build_spectral_model(const Corpus& corpus, const ConceptDistribution& baseline,
                                   const WeightPolicy& policy, LaplacianKind kind,
                                   double min_share) {
    SpectralModel model;
    model.kind = kind;
    model.graph = build_cooccurrence(corpus, filter_concepts(baseline, min_share), policy);
    model.eigen = eigendecompose(laplacian(model.graph, kind), model.graph.size());
    return model;
}

EigenmoodCoords embed_poet(const ConceptDistribution& p, const ConceptDistribution& baseline,
                           const SpectralModel& model, std::size_t k_max) {
    if (p.concepts != baseline.concepts)
        throw DataError("embedding requires matching poet/baseline concept sets");
    if (k_max >= model.graph.size())
        throw DataError("k_max must be below the filtered concept count");

    // Centered mass restricted to the model's concepts, no renormalization.
    std::vector<double> centered(model.graph.size(), 0.0);
    for (std::size_t m = 0; m < model.graph.size(); ++m) {
        bool found = false;
        for (std::size_t i = 0; i < p.concepts.size(); ++i) {
            if (p.concepts[i] == model.graph.concepts[m]) {
                centered[m] = p.probs[i] - baseline.probs[i];
                found = true;
                break;
            }
        }
        if (!found)
            throw DataError("model concept missing from distribution: " + model.graph.concepts[m]);
    }

    EigenmoodCoords out;
    out.coords.reserve(k_max);
    for (std::size_t k = 1; k <= k_max; ++k) {
        double z = 0.0;
        for (std::size_t m = 0; m < model.graph.size(); ++m)
            z += centered[m] * model.eigen.component(k, m);
        out.coords.push_back(z);
    }
    return out;
}

VerseAxisScore score_verse(const AnnotatedVerse& v, const SpectralModel& model, int axis) {
    if (axis < 1 || static_cast<std::size_t>(axis) >= model.graph.size())
        throw DataError("axis outside the model's non-trivial mode range");
    VerseAxisScore out;
    out.ref = {v.poet, v.source_line};
    out.axis = axis;
    if (v.abstain) return out;  // exact zero, excluded from retrieval pools
    for (const auto& li : v.labels) {
        auto col = model.concept_col(concept_name(li.label));
        if (!col) continue;  // filtered-out concepts contribute nothing
        out.score += li.confidence * model.eigen.component(static_cast<std::size_t>(axis), *col);
        out.contributing.push_back(li);
    }
    return out;
}

std::vector<VerseAxisScore> retrieve_extremes(const Corpus& corpus, const SpectralModel& model,
                                              int axis, Direction direction, std::size_t top_n) {
    std::vector<VerseAxisScore> pool;
    for (const auto& v : corpus.verses) {
        if (v.abstain) continue;
        pool.push_back(score_verse(v, model, axis));
    }
    auto better = [direction](const VerseAxisScore& a, const VerseAxisScore& b) {
        double ka = a.score, kb = b.score;
        if (direction == Direction::Negative) {
            ka = -ka;
            kb = -kb;
        } else if (direction == Direction::Absolute) {
            ka = std::fabs(ka);
            kb = std::fabs(kb);
        }
        if (ka != kb) return ka > kb;
        return std::tie(a.ref.poet, a.ref.line) < std::tie(b.ref.poet, b.ref.line);
    };
    std::stable_sort(pool.begin(), pool.end(), better);
    if (pool.size() > top_n) pool.resize(top_n);
    return pool;
}

std::vector<LabelHit> retrieve_by_label(const Corpus& corpus, Concept c, std::size_t top_n) {
    std::vector<LabelHit> hits;
    for (const auto& v : corpus.verses) {
        if (v.abstain) continue;
        for (const auto& li : v.labels)
            if (li.label == c) hits.push_back({{v.poet, v.source_line}, li.confidence});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const LabelHit& a, const LabelHit& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return std::tie(a.ref.poet, a.ref.line) < std::tie(b.ref.poet, b.ref.line);
    });
    if (hits.size() > top_n) hits.resize(top_n);
    return hits;
}

double vector_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw DataError("correlation of mismatched vectors");
    const auto n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    if (da == 0.0 || db == 0.0) throw DataError("correlation of a constant vector");
    return num / std::sqrt(da * db);
}

std::vector<ModeMatch> match_modes(const SpectralModel& reference, const SpectralModel& other,
                                   std::size_t k_max) {
    if (reference.graph.concepts != other.graph.concepts)
        throw DataError("mode matching requires identical concept sets");
    const std::size_t n = reference.graph.size();
    if (k_max >= n) throw DataError("k_max must be below the concept count");

    std::vector<bool> taken(n, false);
    taken[0] = true;  // both trivial modes stay paired
    std::vector<ModeMatch> out;
    for (std::size_t k = 1; k <= k_max; ++k) {
        const auto ref_vec = reference.eigen.eigenvector(k);
        ModeMatch best{k, 0, -1.0};
        for (std::size_t m = 1; m < n; ++m) {
            if (taken[m]) continue;
            const double corr = std::fabs(vector_correlation(ref_vec, other.eigen.eigenvector(m)));
            if (corr > best.abs_correlation) best = {k, m, corr};
        }
        taken[best.matched_axis] = true;
        out.push_back(best);
    }
    return out;
}

}  // namespace eigenmood
