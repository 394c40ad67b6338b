#include "eigenmood/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eigenmood/rng.hpp"

namespace eigenmood {

namespace {

void require_same_concepts(const ConceptDistribution& p, const ConceptDistribution& q) {
    if (p.concepts != q.concepts)
        throw DataError("divergence requires identical concept sets");
}

double kl_terms(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * std::log(p[i] / q[i]);
    return s;
}

}  // namespace

double kl_divergence(const ConceptDistribution& p, const ConceptDistribution& q) {
    require_same_concepts(p, q);
    return kl_terms(p.probs, q.probs);
}

double js_divergence(const ConceptDistribution& p, const ConceptDistribution& q) {
    require_same_concepts(p, q);
    std::vector<double> mid(p.probs.size());
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (p.probs[i] + q.probs[i]);
    return 0.5 * kl_terms(p.probs, mid) + 0.5 * kl_terms(q.probs, mid);
}

double cosine_distance(const ConceptDistribution& p, const ConceptDistribution& q) {
    require_same_concepts(p, q);
    double dot = 0.0, np = 0.0, nq = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        dot += p.probs[i] * q.probs[i];
        np += p.probs[i] * p.probs[i];
        nq += q.probs[i] * q.probs[i];
    }
    return 1.0 - dot / std::sqrt(np * nq);
}

std::vector<double> average_ranks(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;  // mean of 1-based positions
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

namespace {

// Regularized incomplete beta via Lentz's continued fraction.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double reg_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double pearson_of(std::span<const double> xs, std::span<const double> ys) {
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw DataError("correlation of a zero-variance input");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double student_t_two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    const double x = df / (df + t * t);
    return reg_incomplete_beta(0.5 * df, 0.5, x);
}

SpearmanResult spearman_rho(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DataError("rank correlation of unequal-length inputs");
    if (xs.size() < 3) throw DataError("rank correlation needs at least 3 observations");
    const std::size_t n = xs.size();
    const std::vector<double> rx = average_ranks(xs);
    const std::vector<double> ry = average_ranks(ys);
    const double rho = pearson_of(rx, ry);

    SpearmanResult out;
    out.rho = rho;
    if (n >= 10) {
        const double denom = 1.0 - rho * rho;
        const double t = denom <= 0.0
                             ? std::numeric_limits<double>::infinity()
                             : rho * std::sqrt((static_cast<double>(n) - 2.0) / denom);
        out.p_value = student_t_two_sided_p(t, static_cast<double>(n) - 2.0);
        return out;
    }

    // Exact permutation distribution of the rank correlation. Centered rank
    // norms are permutation-invariant, so only the cross dot product moves.
    const double mean = 0.5 * static_cast<double>(n + 1);
    std::vector<double> cx(n), cy(n);
    double nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cx[i] = rx[i] - mean;
        cy[i] = ry[i] - mean;
        nx += cx[i] * cx[i];
        ny += cy[i] * cy[i];
    }
    const double scale = std::sqrt(nx * ny);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const double target = std::fabs(rho) - 1e-12;
    std::uint64_t hits = 0, total = 0;
    do {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += cx[i] * cy[perm[i]];
        if (std::fabs(dot / scale) >= target) ++hits;
        ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.p_value = static_cast<double>(hits) / static_cast<double>(total);
    return out;
}

PearsonResult pearson_r(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DataError("correlation of unequal-length inputs");
    if (xs.size() < 3) throw DataError("correlation needs at least 3 observations");
    const auto n = static_cast<double>(xs.size());

    PearsonResult out;
    out.r = pearson_of(xs, ys);
    const double denom = 1.0 - out.r * out.r;
    out.t_stat = denom <= 0.0 ? std::copysign(std::numeric_limits<double>::infinity(), out.r)
                              : out.r * std::sqrt((n - 2.0) / denom);
    out.p_value = student_t_two_sided_p(out.t_stat, n - 2.0);

    constexpr double kZ975 = 1.959963984540054;
    if (n > 3.0) {
        const double z = std::atanh(std::clamp(out.r, -1.0 + 1e-15, 1.0 - 1e-15));
        const double half = kZ975 / std::sqrt(n - 3.0);
        out.ci_lo = std::tanh(z - half);
        out.ci_hi = std::tanh(z + half);
    }
    return out;
}

double percentile_linear(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw DataError("percentile of an empty sample");
    if (sorted.size() == 1) return sorted[0];
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted[sorted.size() - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

double replicate_statistic(const std::vector<const AnnotatedVerse*>& verses,
                           const std::vector<std::size_t>& idx, const BootstrapSpec& spec,
                           const ConceptDistribution& baseline, const SpectralModel* model) {
    std::vector<double> mass(baseline.concepts.size(), 0.0);
    for (std::size_t i : idx)
        for (const auto& li : verses[i]->labels)
            mass[static_cast<std::size_t>(li.label)] += spec.policy.instance_mass(li.confidence);
    const ConceptDistribution dist = to_distribution(baseline.concepts, mass, baseline.epsilon);
    if (spec.statistic == BootstrapStatistic::JsDivergence) return js_divergence(dist, baseline);
    if (model == nullptr) throw DataError("Eigenmood bootstrap needs a fixed spectral model");
    const auto coords = embed_poet(dist, baseline, *model, static_cast<std::size_t>(spec.axis));
    return coords.coords[static_cast<std::size_t>(spec.axis) - 1];
}

}  // namespace

BootstrapSummary bootstrap_poet_with_sampler(const Corpus& corpus, const std::string& poet,
                                             const BootstrapSpec& spec,
                                             const ConceptDistribution& baseline,
                                             const SpectralModel* model,
                                             const IndexSampler& sampler) {
    if (spec.replicates < 1) throw DataError("bootstrap needs at least one replicate");
    std::vector<const AnnotatedVerse*> verses;
    for (const auto& v : corpus.verses)
        if (v.poet == poet && !v.abstain) verses.push_back(&v);
    if (verses.empty()) throw DataError("no non-abstained verses for poet: " + poet);

    std::vector<double> stats(static_cast<std::size_t>(spec.replicates));
    std::vector<std::size_t> idx;
    for (int r = 0; r < spec.replicates; ++r) {
        sampler(r, verses.size(), idx);
        stats[static_cast<std::size_t>(r)] =
            replicate_statistic(verses, idx, spec, baseline, model);
    }

    BootstrapSummary out;
    out.poet = poet;
    out.replicates = spec.replicates;
    out.statistic = spec.statistic == BootstrapStatistic::JsDivergence
                        ? "D_JS"
                        : "EM" + std::to_string(spec.axis);
    out.seed = spec.seed;
    out.mean = std::accumulate(stats.begin(), stats.end(), 0.0) /
               static_cast<double>(stats.size());
    std::sort(stats.begin(), stats.end());
    out.lo = percentile_linear(stats, 0.025);
    out.hi = percentile_linear(stats, 0.975);
    return out;
}

BootstrapSummary bootstrap_poet(const Corpus& corpus, const std::string& poet,
                                const BootstrapSpec& spec, const ConceptDistribution& baseline,
                                const SpectralModel* model) {
    const std::uint64_t seed = spec.seed;
    IndexSampler sampler = [seed](int replicate, std::size_t n, std::vector<std::size_t>& idx) {
        std::mt19937_64 eng(substream_seed(seed, static_cast<std::uint64_t>(replicate)));
        idx.resize(n);
        for (auto& i : idx) i = static_cast<std::size_t>(bounded_draw(eng, n));
    };
    return bootstrap_poet_with_sampler(corpus, poet, spec, baseline, model, sampler);
}

}  // namespace eigenmood
