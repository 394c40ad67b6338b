#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "eigenmood/aggregate.hpp"
#include "eigenmood/spectral.hpp"
#include "eigenmood/verse.hpp"

namespace eigenmood {

struct DivergenceReport {
    std::string poet;
    double kl = 0.0;               // nats
    double js = 0.0;               // nats, bounded by ln 2
    double cosine_distance = 0.0;  // 1 - cosine similarity
};

// All divergences require identical concept sets and natural logarithms.
double kl_divergence(const ConceptDistribution& p, const ConceptDistribution& q);
double js_divergence(const ConceptDistribution& p, const ConceptDistribution& q);
double cosine_distance(const ConceptDistribution& p, const ConceptDistribution& q);

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

struct SpearmanResult {
    double rho = 0.0;
    double p_value = 1.0;
};

// Pearson correlation of average-ranked data. Two-sided p-value: exact
// permutation below n=10, t-approximation from there up.
SpearmanResult spearman_rho(std::span<const double> xs, std::span<const double> ys);

struct PearsonResult {
    double r = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    double ci_lo = -1.0;  // Fisher-z 95% interval
    double ci_hi = 1.0;
};

PearsonResult pearson_r(std::span<const double> xs, std::span<const double> ys);

// Two-sided tail probability of Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Linear-interpolation percentile of a sorted sample, q in [0,1].
double percentile_linear(std::span<const double> sorted, double q);

enum class BootstrapStatistic { JsDivergence, EigenmoodAxis };

struct BootstrapSpec {
    BootstrapStatistic statistic = BootstrapStatistic::JsDivergence;
    int axis = 2;  // Eigenmood axis when statistic == EigenmoodAxis
    int replicates = 200;
    std::uint64_t seed = 0;
    WeightPolicy policy;
};

struct BootstrapSummary {
    std::string poet;
    int replicates = 0;
    std::string statistic;  // "D_JS" or "EM<k>"
    double mean = 0.0;
    double lo = 0.0;  // 2.5th percentile
    double hi = 0.0;  // 97.5th percentile
    std::uint64_t seed = 0;
};

// Fills idx with n resample indices for one replicate.
using IndexSampler =
    std::function<void(int replicate, std::size_t n, std::vector<std::size_t>& idx)>;

// Resamples the poet's non-abstained verses with replacement and recomputes
// the statistic against the FIXED baseline (and fixed spectral basis for
// Eigenmood statistics). Throws DataError when the poet has no non-abstained
// verses. model may be null for JsDivergence.
BootstrapSummary bootstrap_poet(const Corpus& corpus, const std::string& poet,
                                const BootstrapSpec& spec, const ConceptDistribution& baseline,
                                const SpectralModel* model = nullptr);

// Same computation with an injected index source (test oracle hook).
BootstrapSummary bootstrap_poet_with_sampler(const Corpus& corpus, const std::string& poet,
                                             const BootstrapSpec& spec,
                                             const ConceptDistribution& baseline,
                                             const SpectralModel* model,
                                             const IndexSampler& sampler);

}  // namespace eigenmood
