#include "eigenmood/validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "eigenmood/rng.hpp"

namespace eigenmood {

AdjudicatedReference adjudicate(const DualAnnotation& dual) {
    AdjudicatedReference ref;
    ref.ref = dual.ref;
    ref.labels = dual.annotator_a;
    ref.labels.insert(dual.annotator_b.begin(), dual.annotator_b.end());
    return ref;
}

std::vector<StratumSpec> default_strata() {
    return {
        {"abstained", [](const AnnotatedVerse& v) { return v.abstain; }},
        {"low", [](const AnnotatedVerse& v) { return !v.abstain && v.max_confidence() < 0.7; }},
        {"medium",
         [](const AnnotatedVerse& v) {
             const double m = v.max_confidence();
             return !v.abstain && m >= 0.7 && m < 0.8;
         }},
        {"high", [](const AnnotatedVerse& v) { return !v.abstain && v.max_confidence() >= 0.8; }},
    };
}

std::vector<long> largest_remainder_allocation(const std::vector<long>& populations, long total) {
    long population_total = 0;
    for (long n : populations) population_total += n;
    if (total > population_total)
        throw DataError("sample size exceeds the population");

    const std::size_t k = populations.size();
    std::vector<long> alloc(k, 0);
    std::vector<double> remainder(k, 0.0);
    long assigned = 0;
    for (std::size_t s = 0; s < k; ++s) {
        if (populations[s] == 0) continue;
        const double share = static_cast<double>(total) * static_cast<double>(populations[s]) /
                             static_cast<double>(population_total);
        alloc[s] = std::min(static_cast<long>(std::floor(share)), populations[s]);
        remainder[s] = share - std::floor(share);
        assigned += alloc[s];
    }

    // Hand out the leftover seats by largest remainder; strata at capacity
    // are skipped, so seats displaced by caps spill over in later passes.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    while (assigned < total) {
        bool progressed = false;
        for (std::size_t s : order) {
            if (assigned == total) break;
            if (alloc[s] < populations[s]) {
                ++alloc[s];
                ++assigned;
                progressed = true;
            }
        }
        if (!progressed) throw DataError("allocation failed to converge");
    }
    return alloc;
}

std::vector<VerseRef> stratified_sample(const Corpus& corpus, long total,
                                        const std::vector<StratumSpec>& strata,
                                        std::uint64_t seed) {
    if (total < 0) throw DataError("negative sample size");
    std::vector<std::vector<std::size_t>> members(strata.size());
    for (std::size_t vi = 0; vi < corpus.verses.size(); ++vi) {
        for (std::size_t s = 0; s < strata.size(); ++s) {
            if (strata[s].contains(corpus.verses[vi])) {
                members[s].push_back(vi);
                break;  // strata partition the corpus; first match wins
            }
        }
    }

    std::vector<long> populations;
    populations.reserve(strata.size());
    for (const auto& m : members) populations.push_back(static_cast<long>(m.size()));
    const std::vector<long> alloc = largest_remainder_allocation(populations, total);

    std::vector<std::size_t> sampled;
    std::vector<std::size_t> sampled_stratum;
    for (std::size_t s = 0; s < strata.size(); ++s) {
        auto pool = members[s];
        std::mt19937_64 eng(substream_seed(seed, s));
        const auto take = static_cast<std::size_t>(alloc[s]);
        for (std::size_t i = 0; i < take; ++i) {
            const auto j = i + static_cast<std::size_t>(bounded_draw(eng, pool.size() - i));
            std::swap(pool[i], pool[j]);
            sampled.push_back(pool[i]);
            sampled_stratum.push_back(s);
        }
    }

    // Concept coverage top-up: every concept present somewhere in the corpus
    // must appear in the sample.
    std::vector<long> concept_count(kConceptCount, 0);
    auto bump = [&](std::size_t vi, long delta) {
        for (const auto& li : corpus.verses[vi].labels)
            concept_count[static_cast<std::size_t>(li.label)] += delta;
    };
    std::vector<bool> in_sample(corpus.verses.size(), false);
    for (std::size_t vi : sampled) {
        in_sample[vi] = true;
        bump(vi, 1);
    }
    for (std::size_t c = 0; c < kConceptCount; ++c) {
        if (concept_count[c] > 0) continue;
        // Strongest carrier outside the sample, ties by (poet, line).
        std::size_t best = corpus.verses.size();
        double best_conf = -1.0;
        for (std::size_t vi = 0; vi < corpus.verses.size(); ++vi) {
            if (in_sample[vi]) continue;
            const auto& v = corpus.verses[vi];
            if (v.abstain || !v.has_label(static_cast<Concept>(c))) continue;
            const double conf = v.confidence_for(static_cast<Concept>(c));
            if (conf > best_conf) {
                best_conf = conf;
                best = vi;
            }
        }
        if (best == corpus.verses.size()) continue;  // concept absent from the corpus
        // Evict the most recently drawn verse whose labels all stay covered.
        std::size_t evict = sampled.size();
        for (std::size_t i = sampled.size(); i-- > 0;) {
            bool safe = true;
            for (const auto& li : corpus.verses[sampled[i]].labels)
                if (concept_count[static_cast<std::size_t>(li.label)] < 2) safe = false;
            if (safe) {
                evict = i;
                break;
            }
        }
        if (evict < sampled.size()) {
            in_sample[sampled[evict]] = false;
            bump(sampled[evict], -1);
            sampled[evict] = best;
        } else {
            sampled.push_back(best);
        }
        in_sample[best] = true;
        bump(best, 1);
    }

    std::sort(sampled.begin(), sampled.end());
    std::vector<VerseRef> refs;
    refs.reserve(sampled.size());
    for (std::size_t vi : sampled)
        refs.push_back({corpus.verses[vi].poet, corpus.verses[vi].source_line});
    return refs;
}

KappaResult cohen_kappa(const std::vector<bool>& a_marks, const std::vector<bool>& b_marks) {
    if (a_marks.size() != b_marks.size() || a_marks.empty())
        throw DataError("kappa needs equal-length nonempty mark sequences");
    const auto n = static_cast<double>(a_marks.size());
    long agree = 0;
    KappaResult out;
    for (std::size_t i = 0; i < a_marks.size(); ++i) {
        if (a_marks[i] == b_marks[i]) ++agree;
        if (a_marks[i]) ++out.pos_a;
        if (b_marks[i]) ++out.pos_b;
    }
    out.p_o = static_cast<double>(agree) / n;
    const double pa = static_cast<double>(out.pos_a) / n;
    const double pb = static_cast<double>(out.pos_b) / n;
    out.p_e = pa * pb + (1.0 - pa) * (1.0 - pb);
    if (out.p_e >= 1.0) {
        out.defined = false;
        out.kappa = 0.0;
        return out;
    }
    out.kappa = (out.p_o - out.p_e) / (1.0 - out.p_e);
    return out;
}

AgreementReport agreement_by_concept(const std::vector<DualAnnotation>& duals,
                                     long min_prevalence) {
    if (duals.empty()) throw DataError("agreement over an empty sheet");
    AgreementReport report;
    double kappa_sum = 0.0;
    int kappa_n = 0;
    for (std::size_t c = 0; c < kConceptCount; ++c) {
        std::vector<bool> a(duals.size()), b(duals.size());
        for (std::size_t i = 0; i < duals.size(); ++i) {
            a[i] = duals[i].annotator_a.count(static_cast<Concept>(c)) > 0;
            b[i] = duals[i].annotator_b.count(static_cast<Concept>(c)) > 0;
        }
        KappaResult k = cohen_kappa(a, b);
        report.per_concept.push_back({std::string(kConceptNames[c]), k});
        const bool rare = min_prevalence > 0 &&
                          k.pos_a < min_prevalence && k.pos_b < min_prevalence;
        if (k.defined && !rare) {
            kappa_sum += k.kappa;
            ++kappa_n;
        } else {
            ++report.excluded;
        }
    }
    report.macro_kappa = kappa_n > 0 ? kappa_sum / kappa_n : 0.0;
    return report;
}

PrfReport precision_recall_f1(
    const std::vector<std::pair<VerseRef, std::set<Concept>>>& predictions,
    const std::vector<AdjudicatedReference>& reference, long exclude_below) {
    if (predictions.size() != reference.size())
        throw DataError("predictions and reference differ in length");
    std::vector<std::string> misaligned;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i].first != reference[i].ref)
            misaligned.push_back(predictions[i].first.poet + ":" +
                                 std::to_string(predictions[i].first.line));
    if (!misaligned.empty()) {
        std::string msg = "misaligned verse refs:";
        for (const auto& m : misaligned) msg += " " + m;
        throw DataError(msg);
    }

    PrfReport report;
    double psum = 0.0, rsum = 0.0, fsum = 0.0;
    int macro_n = 0;
    for (std::size_t c = 0; c < kConceptCount; ++c) {
        PrfRow row;
        row.concept_name = kConceptNames[c];
        const auto cc = static_cast<Concept>(c);
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const bool pred = predictions[i].second.count(cc) > 0;
            const bool ref = reference[i].labels.count(cc) > 0;
            if (pred) ++row.predicted;
            if (ref) ++row.support;
            if (pred && ref) ++row.correct;
        }
        row.precision_defined = row.predicted > 0;
        row.recall_defined = row.support > 0;
        row.precision = row.precision_defined
                            ? static_cast<double>(row.correct) / static_cast<double>(row.predicted)
                            : 0.0;
        row.recall = row.recall_defined
                         ? static_cast<double>(row.correct) / static_cast<double>(row.support)
                         : 0.0;
        row.f1 = (row.precision + row.recall) > 0.0
                     ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                     : 0.0;
        const bool rare = exclude_below > 0 && row.support < exclude_below &&
                          row.predicted < exclude_below;
        if (row.precision_defined && row.recall_defined && !rare) {
            psum += row.precision;
            rsum += row.recall;
            fsum += row.f1;
            ++macro_n;
        } else {
            ++report.excluded_from_macro;
        }
        report.per_concept.push_back(std::move(row));
    }
    if (macro_n > 0) {
        report.macro_precision = psum / macro_n;
        report.macro_recall = rsum / macro_n;
        report.macro_f1 = fsum / macro_n;
    }
    return report;
}

double abstention_appropriateness(const std::vector<DualAnnotation>& duals) {
    if (duals.empty()) throw DataError("abstention appropriateness over an empty sheet");
    long both = 0;
    for (const auto& d : duals)
        if (d.a_abstain_ok && d.b_abstain_ok) ++both;
    return static_cast<double>(both) / static_cast<double>(duals.size());
}

double temperature_scale(double p, double temperature) {
    const double z = std::log(p) - std::log1p(-p);
    const double zt = z / temperature;
    if (zt >= 0.0) return 1.0 / (1.0 + std::exp(-zt));
    const double e = std::exp(zt);
    return e / (1.0 + e);
}

namespace {

double binary_nll(std::span<const double> confidences, const std::vector<bool>& correctness,
                  double temperature) {
    double nll = 0.0;
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        const double p = temperature_scale(confidences[i], temperature);
        nll -= correctness[i] ? std::log(p) : std::log1p(-p);
    }
    return nll;
}

}  // namespace

TemperatureFit fit_temperature(std::span<const double> confidences,
                               const std::vector<bool>& correctness) {
    if (confidences.size() != correctness.size() || confidences.empty())
        throw DataError("temperature fit needs aligned nonempty inputs");
    for (double p : confidences)
        if (!(p > 0.0 && p < 1.0))
            throw DataError("temperature fit requires confidences strictly inside (0,1)");

    const double lo_bound = std::log(0.05);
    const double hi_bound = std::log(20.0);
    constexpr double kTol = 1e-6;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;

    double a = lo_bound, b = hi_bound;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = binary_nll(confidences, correctness, std::exp(c));
    double fd = binary_nll(confidences, correctness, std::exp(d));
    while (b - a > kTol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = binary_nll(confidences, correctness, std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = binary_nll(confidences, correctness, std::exp(d));
        }
    }

    TemperatureFit fit;
    const double x = 0.5 * (a + b);
    fit.temperature = std::exp(x);
    fit.nll = binary_nll(confidences, correctness, fit.temperature);
    fit.at_boundary = (x - lo_bound) < 1e-3 || (hi_bound - x) < 1e-3;
    return fit;
}

EceReport ece(std::span<const double> confidences, const std::vector<bool>& correctness,
              double bin_width) {
    if (confidences.size() != correctness.size() || confidences.empty())
        throw DataError("calibration needs aligned nonempty inputs");
    if (!(bin_width > 0.0 && bin_width <= 1.0)) throw DataError("bin width outside (0,1]");

    const auto nbins = static_cast<std::size_t>(std::llround(1.0 / bin_width));
    std::vector<long> count(nbins, 0);
    std::vector<double> conf_sum(nbins, 0.0);
    std::vector<long> correct(nbins, 0);
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        const double p = confidences[i];
        std::size_t bin = nbins - 1;  // the top bin is closed
        for (std::size_t b = 0; b + 1 < nbins; ++b) {
            const double hi = static_cast<double>(b + 1) / static_cast<double>(nbins);
            if (p < hi) {
                bin = b;
                break;
            }
        }
        ++count[bin];
        conf_sum[bin] += p;
        if (correctness[i]) ++correct[bin];
    }

    EceReport report;
    const auto n = static_cast<double>(confidences.size());
    for (std::size_t b = 0; b < nbins; ++b) {
        if (count[b] == 0) continue;
        CalibrationBin bin;
        bin.lo = static_cast<double>(b) / static_cast<double>(nbins);
        bin.hi = static_cast<double>(b + 1) / static_cast<double>(nbins);
        bin.count = count[b];
        bin.mean_conf = conf_sum[b] / static_cast<double>(count[b]);
        bin.accuracy = static_cast<double>(correct[b]) / static_cast<double>(count[b]);
        bin.gap = std::fabs(bin.accuracy - bin.mean_conf);
        report.ece += static_cast<double>(count[b]) / n * bin.gap;
        report.bins.push_back(bin);
    }
    return report;
}

std::vector<CoverageRow> coverage_risk(std::span<const double> confidences,
                                       const std::vector<bool>& correctness,
                                       std::span<const double> thresholds) {
    if (confidences.size() != correctness.size() || confidences.empty())
        throw DataError("coverage-risk needs aligned nonempty inputs");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (thresholds[i] < thresholds[i - 1])
            throw DataError("thresholds must be sorted ascending");

    std::vector<CoverageRow> rows;
    rows.reserve(thresholds.size());
    const auto n = static_cast<double>(confidences.size());
    for (double tau : thresholds) {
        CoverageRow row;
        row.tau = tau;
        long correct = 0;
        for (std::size_t i = 0; i < confidences.size(); ++i) {
            if (confidences[i] >= tau) {
                ++row.retained;
                if (correctness[i]) ++correct;
            }
        }
        row.coverage = static_cast<double>(row.retained) / n;
        if (row.retained > 0) {
            row.accuracy = static_cast<double>(correct) / static_cast<double>(row.retained);
            row.risk = 1.0 - row.accuracy;
        } else {
            row.defined = false;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace eigenmood
