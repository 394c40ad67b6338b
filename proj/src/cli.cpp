#include "eigenmood/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <tuple>

#include "eigenmood/csv.hpp"
#include "eigenmood/gateway.hpp"
#include "eigenmood/ingest.hpp"
#include "eigenmood/stats.hpp"
#include "eigenmood/svg.hpp"
#include "eigenmood/validation.hpp"
#include "json.hpp"

namespace eigenmood::cli {

namespace fs = std::filesystem;

namespace {

std::string out_path(const RunConfig& config, const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
}

std::string snapshot_path(const RunConfig& config) {
    return config.corpus_path.empty() ? out_path(config, "corpus.jsonl") : config.corpus_path;
}

void ensure_out_dir(const RunConfig& config) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw DataError("cannot create output directory: " + config.out_dir);
}

void write_config(const RunConfig& config, const std::string& command) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["inputs"] = config.inputs;
    j["out_dir"] = config.out_dir;
    j["corpus_path"] = config.corpus_path;
    j["weight"] = config.policy.kind == WeightKind::Uniform ? "uniform" : "confidence";
    if (config.policy.threshold)
        j["tau"] = *config.policy.threshold;
    else
        j["tau"] = nullptr;
    j["laplacian"] = std::string(laplacian_kind_name(config.laplacian));
    j["min_share"] = config.min_share;
    j["epsilon"] = kEpsilon;  // fixed constant, recorded for audit
    j["dedup"] = config.dedup;
    j["strict"] = config.strict;
    j["augment"] = config.augment;
    j["replicates"] = config.replicates;
    j["seed"] = config.seed;
    j["k_max"] = config.k_max;
    j["top_n"] = config.top_n;
    j["svg"] = config.emit_svg;
    j["exclude_rare"] = config.exclude_rare;
    j["rare_floor"] = config.rare_floor;
    j["sheet_path"] = config.sheet_path;
    j["verses_path"] = config.verses_path;
    j["responses_path"] = config.responses_path;
    j["prompt_path"] = config.prompt_path;
    std::ofstream out(out_path(config, command + "_config.json"), std::ios::binary);
    if (!out) throw DataError("cannot write run config");
    out << j.dump(2) << "\n";
}

std::string ref_string(const VerseRef& ref) {
    return ref.poet + ":" + std::to_string(ref.line);
}

std::string joined_labels(const AnnotatedVerse& v) {
    std::string out;
    for (const auto& li : v.labels) {
        if (!out.empty()) out += ';';
        out += concept_name(li.label);
    }
    return out;
}

std::string joined_confidences(const AnnotatedVerse& v) {
    std::string out;
    for (const auto& li : v.labels) {
        if (!out.empty()) out += ';';
        out += format_sig(li.confidence, 12);
    }
    return out;
}

const AnnotatedVerse& find_verse(const Corpus& corpus, const VerseRef& ref) {
    for (const auto& v : corpus.verses)
        if (v.poet == ref.poet && v.source_line == ref.line) return v;
    throw DataError("verse not found: " + ref_string(ref));
}

// Per-poet verse counts and abstain rates used across several tables.
struct PoetShape {
    long verses = 0;
    long abstained = 0;
    double abstain_rate() const {
        return verses > 0 ? static_cast<double>(abstained) / static_cast<double>(verses) : 0.0;
    }
};

std::map<std::string, PoetShape> poet_shapes(const Corpus& corpus) {
    std::map<std::string, PoetShape> shapes;
    for (const auto& v : corpus.verses) {
        auto& s = shapes[v.poet];
        ++s.verses;
        if (v.abstain) ++s.abstained;
    }
    return shapes;
}

// Descending ranks (1 = largest value); ties share the smallest rank.
std::vector<long> desc_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<long> ranks(values.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        if (pos > 0 && values[order[pos]] == values[order[pos - 1]])
            ranks[order[pos]] = ranks[order[pos - 1]];
        else
            ranks[order[pos]] = static_cast<long>(pos) + 1;
    }
    return ranks;
}

void write_divergence_table(const RunConfig& config, const std::string& name,
                            const Corpus& corpus, const std::vector<std::string>& poets,
                            const std::vector<DivergenceReport>& reports, bool display) {
    const auto shapes = poet_shapes(corpus);
    std::vector<std::size_t> order(poets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return reports[a].js > reports[b].js;
    });

    CsvWriter w(out_path(config, name));
    w.set_display(display);
    w.raw("poet").raw("verses").raw("abstain_rate").raw("d_js").raw("d_kl").raw("cosine_distance");
    w.end_row();
    for (std::size_t i : order) {
        const auto& shape = shapes.at(poets[i]);
        w.text(poets[i])
            .integer(shape.verses)
            .num(shape.abstain_rate())
            .num(reports[i].js)
            .num(reports[i].kl)
            .num(reports[i].cosine_distance);
        w.end_row();
    }
}

}  // namespace

Corpus load_snapshot(const RunConfig& config) {
    const std::string path = snapshot_path(config);
    if (!fs::exists(path))
        throw DataError("missing corpus snapshot " + path + "; run the ingest stage first");
    LoadOptions opts;
    opts.strict = true;
    return load_corpus({path}, opts);
}

void cmd_ingest(const RunConfig& config) {
    if (config.inputs.empty()) throw UsageError("ingest needs at least one input file");
    for (const auto& path : config.inputs)
        if (!fs::exists(path)) throw DataError("unreadable input path: " + path);
    ensure_out_dir(config);

    LoadOptions opts;
    opts.strict = config.strict;
    LoadReport report;
    Corpus corpus = load_corpus(config.inputs, opts, &report);

    if (config.dedup) {
        auto [deduped, dedup_report] = dedup_corpus(corpus, NormalizationPolicy{});
        corpus = std::move(deduped);
        CsvWriter w(out_path(config, "dedup_report.csv"));
        w.raw("poet").raw("line").raw("reason");
        w.end_row();
        for (const auto& r : dedup_report.removed) {
            w.text(r.poet).integer(r.line).text("duplicate of line " + std::to_string(r.kept_line));
            w.end_row();
        }
    }

    if (!report.errors.empty() || !report.warnings.empty()) {
        CsvWriter w(out_path(config, "load_report.csv"));
        w.raw("severity").raw("file").raw("poet").raw("line").raw("message");
        w.end_row();
        for (const auto& e : report.errors) {
            w.raw("error").text(e.file).text(e.poet).integer(e.line).text(e.message);
            w.end_row();
        }
        for (const auto& e : report.warnings) {
            w.raw("warning").text(e.file).text(e.poet).integer(e.line).text(e.message);
            w.end_row();
        }
    }

    {
        std::ofstream snap(out_path(config, "corpus.jsonl"), std::ios::binary);
        if (!snap) throw DataError("cannot write corpus snapshot");
        for (const auto& v : corpus.verses) snap << serialize_record(v) << "\n";
    }

    const CorpusStats stats = corpus_stats(corpus);
    {
        CsvWriter w(out_path(config, "stats.csv"));
        w.raw("metric").raw("value");
        w.end_row();
        w.raw("verses").integer(stats.verses);
        w.end_row();
        w.raw("abstained").integer(stats.abstained);
        w.end_row();
        w.raw("abstain_rate").raw(stats.abstain_rate_defined ? format_sig(stats.abstain_rate)
                                                             : "undefined");
        w.end_row();
        w.raw("label_instances").integer(stats.label_instances);
        w.end_row();
        w.raw("labels_per_annotated_verse")
            .raw(stats.labels_per_verse_defined ? format_sig(stats.labels_per_annotated_verse)
                                                : "undefined");
        w.end_row();
        w.raw("confidence_min")
            .raw(stats.confidence_defined ? format_sig(stats.confidence_min) : "undefined");
        w.end_row();
        w.raw("confidence_mean")
            .raw(stats.confidence_defined ? format_sig(stats.confidence_mean) : "undefined");
        w.end_row();
        w.raw("confidence_max")
            .raw(stats.confidence_defined ? format_sig(stats.confidence_max) : "undefined");
        w.end_row();
    }
    {
        CsvWriter w(out_path(config, "stats_by_poet.csv"));
        w.raw("poet")
            .raw("verses")
            .raw("abstained")
            .raw("abstain_rate")
            .raw("label_instances")
            .raw("mean_confidence");
        w.end_row();
        for (const auto& p : stats.per_poet) {
            w.text(p.poet)
                .integer(p.verses)
                .integer(p.abstained)
                .num(p.abstain_rate)
                .integer(p.label_instances)
                .num(p.mean_confidence);
            w.end_row();
        }
    }
    write_config(config, "ingest");
}

void cmd_profile(const RunConfig& config) {
    ensure_out_dir(config);
    Corpus corpus = load_snapshot(config);
    if (corpus.verses.empty()) throw UsageError("corpus snapshot is empty");

    const PoetConceptMatrix matrix = poet_concept_mass(corpus, config.policy);
    const ConceptDistribution baseline = global_baseline(matrix);

    {
        CsvWriter w(out_path(config, "matrix.csv"));
        w.raw("poet");
        for (const auto& c : matrix.concepts) w.raw(c);
        w.end_row();
        for (std::size_t i = 0; i < matrix.poets.size(); ++i) {
            w.text(matrix.poets[i]);
            for (std::size_t c = 0; c < matrix.concepts.size(); ++c) w.num(matrix.at(i, c));
            w.end_row();
        }
    }
    {
        // Concept totals plus baseline share, largest mass first.
        std::vector<std::size_t> order(matrix.concepts.size());
        std::vector<double> totals(matrix.concepts.size(), 0.0);
        for (std::size_t c = 0; c < matrix.concepts.size(); ++c) {
            order[c] = c;
            for (std::size_t i = 0; i < matrix.poets.size(); ++i) totals[c] += matrix.at(i, c);
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return totals[a] > totals[b]; });
        for (bool display : {false, true}) {
            CsvWriter w(out_path(config, display ? "baseline-display.csv" : "baseline.csv"));
            w.set_display(display);
            w.raw("concept").raw("weighted_mass").raw("share");
            w.end_row();
            for (std::size_t c : order) {
                w.text(matrix.concepts[c]).num(totals[c]).num(baseline.probs[c]);
                w.end_row();
            }
        }
    }

    std::vector<ConceptDistribution> dists;
    dists.reserve(matrix.poets.size());
    for (std::size_t i = 0; i < matrix.poets.size(); ++i)
        dists.push_back(poet_distribution(matrix, i));

    for (bool display : {false, true}) {
        CsvWriter w(out_path(config, display ? "distributions-display.csv" : "distributions.csv"));
        w.set_display(display);
        w.raw("poet");
        for (const auto& c : matrix.concepts) w.raw(c);
        w.end_row();
        for (std::size_t i = 0; i < matrix.poets.size(); ++i) {
            w.text(matrix.poets[i]);
            for (double p : dists[i].probs) w.num(p);
            w.end_row();
        }
    }

    for (bool display : {false, true}) {
        CsvWriter w(out_path(config, display ? "lifts-display.csv" : "lifts.csv"));
        w.set_display(display);
        w.raw("poet").raw("concept").raw("delta");
        w.end_row();
        for (std::size_t i = 0; i < matrix.poets.size(); ++i) {
            const LiftProfile lift = concept_lift(dists[i], baseline);
            for (const auto& [name, delta] : lift.sorted()) {
                w.text(matrix.poets[i]).text(name).num(delta);
                w.end_row();
            }
        }
    }

    std::vector<DivergenceReport> reports;
    reports.reserve(matrix.poets.size());
    for (std::size_t i = 0; i < matrix.poets.size(); ++i)
        reports.push_back({matrix.poets[i], kl_divergence(dists[i], baseline),
                           js_divergence(dists[i], baseline),
                           cosine_distance(dists[i], baseline)});
    write_divergence_table(config, "divergence.csv", corpus, matrix.poets, reports, false);
    write_divergence_table(config, "divergence-display.csv", corpus, matrix.poets, reports, true);

    if (config.augment) {
        const PoetConceptMatrix aug = augment_with_abstain(corpus, config.policy);
        const ConceptDistribution aug_baseline = global_baseline(aug);
        std::vector<double> js_base(matrix.poets.size()), js_aug(matrix.poets.size());
        for (std::size_t i = 0; i < matrix.poets.size(); ++i) {
            js_base[i] = reports[i].js;
            js_aug[i] = js_divergence(poet_distribution(aug, i), aug_baseline);
        }
        const std::vector<long> rank_base = desc_ranks(js_base);
        const std::vector<long> rank_aug = desc_ranks(js_aug);
        const auto shapes = poet_shapes(corpus);

        std::vector<std::size_t> order(matrix.poets.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return js_base[a] > js_base[b]; });
        for (bool display : {false, true}) {
            CsvWriter w(out_path(config, display ? "augmented_divergence-display.csv"
                                                 : "augmented_divergence.csv"));
            w.set_display(display);
            w.raw("poet")
                .raw("abstain_rate")
                .raw("d_js_base")
                .raw("d_js_augmented")
                .raw("rank_change");
            w.end_row();
            for (std::size_t i : order) {
                w.text(matrix.poets[i])
                    .num(shapes.at(matrix.poets[i]).abstain_rate())
                    .num(js_base[i])
                    .num(js_aug[i])
                    .integer(rank_aug[i] - rank_base[i]);
                w.end_row();
            }
        }

        if (matrix.poets.size() >= 3) {
            const SpearmanResult rs = spearman_rho(js_base, js_aug);
            CsvWriter w(out_path(config, "rank_stability.csv"));
            w.raw("comparison").raw("spearman_rho").raw("p_value");
            w.end_row();
            w.text("base vs abstention-inclusive").num(rs.rho).num(rs.p_value);
            w.end_row();
        }
    }

    if (config.replicates > 0) {
        CsvWriter w(out_path(config, "bootstrap.csv"));
        w.raw("poet")
            .raw("statistic")
            .raw("replicates")
            .raw("mean")
            .raw("p2_5")
            .raw("p97_5")
            .raw("seed");
        w.end_row();
        for (const auto& poet : matrix.poets) {
            const bool has_evidence = std::any_of(
                corpus.verses.begin(), corpus.verses.end(),
                [&](const AnnotatedVerse& v) { return v.poet == poet && !v.abstain; });
            if (!has_evidence) continue;
            BootstrapSpec spec;
            spec.statistic = BootstrapStatistic::JsDivergence;
            spec.replicates = config.replicates;
            spec.seed = config.seed;
            spec.policy = config.policy;
            const BootstrapSummary s = bootstrap_poet(corpus, poet, spec, baseline);
            w.text(s.poet)
                .text(s.statistic)
                .integer(s.replicates)
                .num(s.mean)
                .num(s.lo)
                .num(s.hi)
                .integer(static_cast<long>(s.seed));
            w.end_row();
        }
    }
    write_config(config, "profile");
}

void cmd_spectral(const RunConfig& config) {
    ensure_out_dir(config);
    Corpus corpus = load_snapshot(config);
    if (corpus.verses.empty()) throw UsageError("corpus snapshot is empty");

    const PoetConceptMatrix matrix = poet_concept_mass(corpus, config.policy);
    const ConceptDistribution baseline = global_baseline(matrix);
    const SpectralModel model = build_spectral_model(corpus, baseline, config.policy,
                                                     config.laplacian, config.min_share);
    const std::size_t n = model.graph.size();
    if (config.k_max < 1 || static_cast<std::size_t>(config.k_max) >= n)
        throw DataError("k_max must lie in [1, filtered_concepts-1]");
    const auto k_max = static_cast<std::size_t>(config.k_max);

    for (bool display : {false, true}) {
        CsvWriter w(out_path(config, display ? "edges-display.csv" : "edges.csv"));
        w.set_display(display);
        w.raw("concept_a").raw("concept_b").raw("weight");
        w.end_row();
        std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (model.graph.w(i, j) > 0.0) edges.emplace_back(model.graph.w(i, j), i, j);
        std::stable_sort(edges.begin(), edges.end(),
                         [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
        for (const auto& [wgt, i, j] : edges) {
            w.text(model.graph.concepts[i]).text(model.graph.concepts[j]).num(wgt);
            w.end_row();
        }
    }

    {
        CsvWriter w(out_path(config, "eigenvalues.csv"));
        w.raw("k").raw("lambda");
        w.end_row();
        for (std::size_t k = 0; k < n; ++k) {
            w.integer(static_cast<long>(k)).num(model.eigen.values[k]);
            w.end_row();
        }
    }

    for (bool display : {false, true}) {
        CsvWriter w(out_path(config, display ? "loadings-display.csv" : "loadings.csv"));
        w.set_display(display);
        w.raw("concept");
        for (std::size_t k = 0; k <= k_max; ++k) w.raw("u" + std::to_string(k));
        w.end_row();
        for (std::size_t i = 0; i < n; ++i) {
            w.text(model.graph.concepts[i]);
            for (std::size_t k = 0; k <= k_max; ++k) w.num(model.eigen.component(k, i));
            w.end_row();
        }
    }

    std::vector<EigenmoodCoords> coords;
    coords.reserve(matrix.poets.size());
    for (std::size_t i = 0; i < matrix.poets.size(); ++i) {
        EigenmoodCoords c = embed_poet(poet_distribution(matrix, i), baseline, model, k_max);
        c.poet = matrix.poets[i];
        coords.push_back(std::move(c));
    }
    for (bool display : {false, true}) {
        CsvWriter w(out_path(config, display ? "coords-display.csv" : "coords.csv"));
        w.set_display(display);
        w.raw("poet");
        for (std::size_t k = 1; k <= k_max; ++k) w.raw("em" + std::to_string(k));
        w.end_row();
        for (const auto& c : coords) {
            w.text(c.poet);
            for (double z : c.coords) w.num(z);
            w.end_row();
        }
    }

    auto write_retrieval = [&](const std::string& name, const std::vector<VerseAxisScore>& rows) {
        CsvWriter w(out_path(config, name));
        w.raw("poet").raw("line").raw("score").raw("text").raw("labels").raw("confidences");
        w.end_row();
        for (const auto& r : rows) {
            const AnnotatedVerse& v = find_verse(corpus, r.ref);
            w.text(r.ref.poet)
                .integer(r.ref.line)
                .num(r.score)
                .text(v.text)
                .text(joined_labels(v))
                .text(joined_confidences(v));
            w.end_row();
        }
    };
    for (std::size_t k = 1; k <= k_max; ++k) {
        const auto axis = static_cast<int>(k);
        write_retrieval("retrieval_em" + std::to_string(k) + "_positive.csv",
                        retrieve_extremes(corpus, model, axis, Direction::Positive,
                                          static_cast<std::size_t>(config.top_n)));
        write_retrieval("retrieval_em" + std::to_string(k) + "_negative.csv",
                        retrieve_extremes(corpus, model, axis, Direction::Negative,
                                          static_cast<std::size_t>(config.top_n)));
    }

    for (std::size_t c = 0; c < kConceptCount; ++c) {
        const auto hits = retrieve_by_label(corpus, static_cast<Concept>(c),
                                            static_cast<std::size_t>(config.top_n));
        CsvWriter w(out_path(config, "retrieval_label_" + std::string(kConceptNames[c]) + ".csv"));
        w.raw("poet").raw("line").raw("confidence").raw("text");
        w.end_row();
        for (const auto& h : hits) {
            const AnnotatedVerse& v = find_verse(corpus, h.ref);
            w.text(h.ref.poet).integer(h.ref.line).num(h.confidence).text(v.text);
            w.end_row();
        }
    }

    {
        // Mean confidence of contributing labels among the strongest |score|
        // verses per axis; the pool size matches the published diagnostic.
        constexpr std::size_t kDiagnosticPool = 500;
        CsvWriter w(out_path(config, "retrieval_summary.csv"));
        w.raw("axis").raw("pool").raw("mean_contributing_confidence");
        w.end_row();
        for (std::size_t k = 1; k <= k_max; ++k) {
            const auto rows = retrieve_extremes(corpus, model, static_cast<int>(k),
                                                Direction::Absolute, kDiagnosticPool);
            double sum = 0.0;
            long count = 0;
            for (const auto& r : rows)
                for (const auto& li : r.contributing) {
                    sum += li.confidence;
                    ++count;
                }
            w.raw("em" + std::to_string(k))
                .integer(static_cast<long>(rows.size()))
                .num(count > 0 ? sum / static_cast<double>(count) : 0.0);
            w.end_row();
        }
    }

    if (config.laplacian == LaplacianKind::SymmetricNormalized) {
        // Sensitivity diagnostic against the unnormalized geometry.
        const SpectralModel reference = build_spectral_model(
            corpus, baseline, config.policy, LaplacianKind::Unnormalized, config.min_share);
        const auto matches = match_modes(reference, model, k_max);
        std::vector<EigenmoodCoords> ref_coords;
        for (std::size_t i = 0; i < matrix.poets.size(); ++i)
            ref_coords.push_back(embed_poet(poet_distribution(matrix, i), baseline, reference, k_max));
        CsvWriter w(out_path(config, "mode_match.csv"));
        w.raw("reference_axis").raw("matched_axis").raw("abs_eigvec_corr").raw("coord_corr");
        w.end_row();
        for (const auto& m : matches) {
            std::vector<double> a, b;
            for (std::size_t i = 0; i < matrix.poets.size(); ++i) {
                a.push_back(ref_coords[i].coords[m.axis - 1]);
                b.push_back(coords[i].coords[m.matched_axis - 1]);
            }
            double coord_corr = 0.0;
            try {
                coord_corr = vector_correlation(a, b);
            } catch (const DataError&) {
                coord_corr = 0.0;  // constant coordinates across poets
            }
            w.integer(static_cast<long>(m.axis))
                .integer(static_cast<long>(m.matched_axis))
                .num(m.abs_correlation)
                .num(coord_corr);
            w.end_row();
        }
    }

    if (config.replicates > 0) {
        CsvWriter w(out_path(config, "bootstrap_em.csv"));
        w.raw("poet")
            .raw("statistic")
            .raw("replicates")
            .raw("mean")
            .raw("p2_5")
            .raw("p97_5")
            .raw("seed");
        w.end_row();
        for (const auto& poet : matrix.poets) {
            const bool has_evidence = std::any_of(
                corpus.verses.begin(), corpus.verses.end(),
                [&](const AnnotatedVerse& v) { return v.poet == poet && !v.abstain; });
            if (!has_evidence) continue;
            for (std::size_t k = 1; k <= k_max; ++k) {
                BootstrapSpec spec;
                spec.statistic = BootstrapStatistic::EigenmoodAxis;
                spec.axis = static_cast<int>(k);
                spec.replicates = config.replicates;
                spec.seed = config.seed;
                spec.policy = config.policy;
                const BootstrapSummary s = bootstrap_poet(corpus, poet, spec, baseline, &model);
                w.text(s.poet)
                    .text(s.statistic)
                    .integer(s.replicates)
                    .num(s.mean)
                    .num(s.lo)
                    .num(s.hi)
                    .integer(static_cast<long>(s.seed));
                w.end_row();
            }
        }
    }
    write_config(config, "spectral");
}

namespace {

std::set<Concept> parse_label_set(const std::string& joined, const std::string& context) {
    std::set<Concept> out;
    std::size_t start = 0;
    while (start <= joined.size()) {
        std::size_t end = joined.find(';', start);
        if (end == std::string::npos) end = joined.size();
        const std::string name = joined.substr(start, end - start);
        if (!name.empty()) {
            auto c = concept_from_name(name);
            if (!c) throw DataError("unknown label '" + name + "' in " + context);
            out.insert(*c);
        }
        start = end + 1;
    }
    return out;
}

bool parse_bool_cell(const std::string& cell, const std::string& context) {
    if (cell == "1" || cell == "true" || cell == "TRUE" || cell == "True") return true;
    if (cell == "0" || cell == "false" || cell == "FALSE" || cell == "False") return false;
    throw DataError("expected a boolean in " + context + ", got '" + cell + "'");
}

VerseRef parse_ref(const std::string& cell) {
    const auto pos = cell.rfind(':');
    if (pos == std::string::npos || pos + 1 >= cell.size())
        throw DataError("verse_ref must look like poet:line, got '" + cell + "'");
    VerseRef ref;
    ref.poet = cell.substr(0, pos);
    ref.line = std::atoi(cell.c_str() + pos + 1);
    if (ref.line < 1) throw DataError("verse_ref line must be >= 1: '" + cell + "'");
    return ref;
}

}  // namespace

void cmd_validate(const RunConfig& config) {
    if (config.sheet_path.empty()) throw UsageError("validate needs --sheet");
    ensure_out_dir(config);
    Corpus corpus = load_snapshot(config);

    const auto rows = read_csv(config.sheet_path);
    if (rows.size() < 2) throw DataError("validation sheet is empty: " + config.sheet_path);
    const std::vector<std::string> header = {"verse_ref", "annotator_a_labels",
                                             "annotator_b_labels", "a_abstain_ok", "b_abstain_ok"};
    if (rows[0] != std::vector<std::string>(header.begin(), header.end()))
        throw DataError("validation sheet header mismatch");

    std::vector<DualAnnotation> duals;
    std::vector<std::string> missing;
    std::vector<const AnnotatedVerse*> verses;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size())
            throw DataError("validation sheet row " + std::to_string(r + 1) + " has wrong arity");
        DualAnnotation d;
        d.ref = parse_ref(rows[r][0]);
        d.annotator_a = parse_label_set(rows[r][1], "annotator_a_labels row " + std::to_string(r + 1));
        d.annotator_b = parse_label_set(rows[r][2], "annotator_b_labels row " + std::to_string(r + 1));
        d.a_abstain_ok = parse_bool_cell(rows[r][3], "a_abstain_ok row " + std::to_string(r + 1));
        d.b_abstain_ok = parse_bool_cell(rows[r][4], "b_abstain_ok row " + std::to_string(r + 1));
        duals.push_back(std::move(d));
        const AnnotatedVerse* verse = nullptr;
        for (const auto& v : corpus.verses)
            if (v.poet == duals.back().ref.poet && v.source_line == duals.back().ref.line) {
                verse = &v;
                break;
            }
        if (verse == nullptr)
            missing.push_back(ref_string(duals.back().ref));
        else
            verses.push_back(verse);
    }
    if (!missing.empty()) {
        std::string msg = "sheet refs absent from the corpus:";
        for (const auto& m : missing) msg += " " + m;
        throw DataError(msg);
    }

    const long floor = config.exclude_rare ? config.rare_floor : 0;
    const AgreementReport agreement = agreement_by_concept(duals, floor);
    for (bool display : {false, true}) {
        CsvWriter w(out_path(config, display ? "agreement-display.csv" : "agreement.csv"));
        w.set_display(display);
        w.raw("concept").raw("p_o").raw("p_e").raw("kappa").raw("pos_a").raw("pos_b");
        w.end_row();
        for (const auto& row : agreement.per_concept) {
            w.text(row.concept_name).num(row.kappa.p_o).num(row.kappa.p_e);
            if (row.kappa.defined)
                w.num(row.kappa.kappa);
            else
                w.raw("undefined");
            w.integer(row.kappa.pos_a).integer(row.kappa.pos_b);
            w.end_row();
        }
    }

    std::vector<std::pair<VerseRef, std::set<Concept>>> predictions;
    std::vector<AdjudicatedReference> references;
    for (std::size_t i = 0; i < duals.size(); ++i) {
        std::set<Concept> pred;
        for (const auto& li : verses[i]->labels) pred.insert(li.label);
        predictions.emplace_back(duals[i].ref, std::move(pred));
        references.push_back(adjudicate(duals[i]));
    }
    const PrfReport prf = precision_recall_f1(predictions, references, floor);
    for (bool display : {false, true}) {
        CsvWriter w(out_path(config, display ? "prf1-display.csv" : "prf1.csv"));
        w.set_display(display);
        w.raw("concept")
            .raw("predicted")
            .raw("correct")
            .raw("precision")
            .raw("recall")
            .raw("f1")
            .raw("support");
        w.end_row();
        for (const auto& row : prf.per_concept) {
            w.text(row.concept_name).integer(row.predicted).integer(row.correct);
            if (row.precision_defined)
                w.num(row.precision);
            else
                w.raw("undefined");
            if (row.recall_defined)
                w.num(row.recall);
            else
                w.raw("undefined");
            w.num(row.f1).integer(row.support);
            w.end_row();
        }
    }

    // Label-instance correctness against the adjudicated reference.
    std::vector<double> confidences;
    std::vector<bool> correctness;
    for (std::size_t i = 0; i < duals.size(); ++i) {
        for (const auto& li : verses[i]->labels) {
            const double clamped = std::clamp(li.confidence, 1e-6, 1.0 - 1e-6);
            confidences.push_back(clamped);
            correctness.push_back(references[i].labels.count(li.label) > 0);
        }
    }

    double temperature = 1.0;
    double ece_value = 0.0;
    bool boundary = false;
    if (!confidences.empty()) {
        const TemperatureFit fit = fit_temperature(confidences, correctness);
        temperature = fit.temperature;
        boundary = fit.at_boundary;
        std::vector<double> scaled(confidences.size());
        for (std::size_t i = 0; i < confidences.size(); ++i)
            scaled[i] = temperature_scale(confidences[i], temperature);

        const EceReport cal = ece(scaled, correctness, 0.1);
        ece_value = cal.ece;
        for (bool display : {false, true}) {
            CsvWriter w(out_path(config, display ? "calibration-display.csv" : "calibration.csv"));
            w.set_display(display);
            w.raw("bin_lo").raw("bin_hi").raw("count").raw("mean_conf").raw("accuracy").raw("gap");
            w.end_row();
            for (const auto& bin : cal.bins) {
                w.num(bin.lo)
                    .num(bin.hi)
                    .integer(bin.count)
                    .num(bin.mean_conf)
                    .num(bin.accuracy)
                    .num(bin.gap);
                w.end_row();
            }
        }

        const std::vector<double> thresholds = {0.3, 0.5, 0.7, 0.8, 0.9};
        const auto curve = coverage_risk(scaled, correctness, thresholds);
        for (bool display : {false, true}) {
            CsvWriter w(out_path(config,
                                 display ? "coverage_risk-display.csv" : "coverage_risk.csv"));
            w.set_display(display);
            w.raw("tau").raw("retained").raw("coverage").raw("accuracy").raw("risk");
            w.end_row();
            for (const auto& row : curve) {
                w.num(row.tau).integer(row.retained).num(row.coverage);
                if (row.defined)
                    w.num(row.accuracy).num(row.risk);
                else
                    w.raw("undefined").raw("undefined");
                w.end_row();
            }
        }
    }

    {
        CsvWriter w(out_path(config, "validation_summary.csv"));
        w.raw("metric").raw("value");
        w.end_row();
        w.raw("macro_kappa").num(agreement.macro_kappa);
        w.end_row();
        w.raw("kappa_excluded").integer(agreement.excluded);
        w.end_row();
        w.raw("macro_precision").num(prf.macro_precision);
        w.end_row();
        w.raw("macro_recall").num(prf.macro_recall);
        w.end_row();
        w.raw("macro_f1").num(prf.macro_f1);
        w.end_row();
        w.raw("prf_excluded").integer(prf.excluded_from_macro);
        w.end_row();
        w.raw("abstention_appropriateness").num(abstention_appropriateness(duals));
        w.end_row();
        w.raw("temperature").num(temperature);
        w.end_row();
        w.raw("temperature_at_boundary").raw(boundary ? "1" : "0");
        w.end_row();
        w.raw("ece").num(ece_value);
        w.end_row();
        w.raw("instances").integer(static_cast<long>(confidences.size()));
        w.end_row();
    }
    write_config(config, "validate");
}

namespace {

double cell_to_double(const std::string& cell) { return std::strtod(cell.c_str(), nullptr); }

std::vector<std::vector<std::string>> require_stage_csv(const RunConfig& config,
                                                        const std::string& name,
                                                        const std::string& stage) {
    const std::string path = out_path(config, name);
    if (!fs::exists(path))
        throw DataError("missing " + name + "; run the " + stage + " stage first");
    return read_csv(path);
}

}  // namespace

void cmd_report(const RunConfig& config) {
    ensure_out_dir(config);
    Corpus corpus = load_snapshot(config);  // names the ingest stage when missing
    const auto divergence = require_stage_csv(config, "divergence.csv", "profile");
    const auto distributions = require_stage_csv(config, "distributions.csv", "profile");
    const auto coords = require_stage_csv(config, "coords.csv", "spectral");

    // Confidence histogram over every label assignment, 0.05-wide bins
    // spanning the observed range.
    {
        std::vector<double> confs;
        for (const auto& v : corpus.verses)
            for (const auto& li : v.labels) confs.push_back(li.confidence);
        CsvWriter w(out_path(config, "fig_confidence_histogram.csv"));
        w.raw("bin_lo").raw("bin_hi").raw("count");
        w.end_row();
        svg::Series series;
        if (!confs.empty()) {
            constexpr double kWidth = 0.05;
            const double lo = std::floor(*std::min_element(confs.begin(), confs.end()) / kWidth) *
                              kWidth;
            const double hi = *std::max_element(confs.begin(), confs.end());
            const auto nbins = static_cast<std::size_t>(
                std::max(1.0, std::ceil((hi - lo) / kWidth - 1e-12)));
            std::vector<long> counts(nbins, 0);
            for (double c : confs) {
                auto b = static_cast<std::size_t>((c - lo) / kWidth);
                if (b >= nbins) b = nbins - 1;
                ++counts[b];
            }
            for (std::size_t b = 0; b < nbins; ++b) {
                const double blo = lo + kWidth * static_cast<double>(b);
                w.num(blo).num(blo + kWidth).integer(counts[b]);
                w.end_row();
                series.labels.push_back(format_fixed(blo, 2));
                series.x.push_back(blo);
                series.y.push_back(static_cast<double>(counts[b]));
            }
        }
        if (config.emit_svg)
            svg::write_bar_chart(out_path(config, "fig_confidence_histogram.svg"),
                                 "Confidence histogram", series);
    }

    const auto shapes = poet_shapes(corpus);
    {
        CsvWriter w(out_path(config, "fig_abstention_by_poet.csv"));
        w.raw("poet").raw("abstain_rate");
        w.end_row();
        svg::Series series;
        for (const auto& poet : corpus.poets) {
            w.text(poet).num(shapes.at(poet).abstain_rate());
            w.end_row();
            series.labels.push_back(poet);
            series.x.push_back(static_cast<double>(series.x.size()));
            series.y.push_back(shapes.at(poet).abstain_rate());
        }
        if (config.emit_svg)
            svg::write_bar_chart(out_path(config, "fig_abstention_by_poet.svg"),
                                 "Abstention rate by poet", series);
    }

    std::map<std::string, double> js_by_poet;
    std::map<std::string, long> verses_by_poet;
    for (std::size_t r = 1; r < divergence.size(); ++r) {
        js_by_poet[divergence[r][0]] = cell_to_double(divergence[r][3]);
        verses_by_poet[divergence[r][0]] = std::atol(divergence[r][1].c_str());
    }
    {
        CsvWriter w(out_path(config, "fig_divergence_by_poet.csv"));
        w.raw("poet").raw("d_js");
        w.end_row();
        svg::Series series;
        for (std::size_t r = 1; r < divergence.size(); ++r) {
            w.text(divergence[r][0]).raw(divergence[r][3]);
            w.end_row();
            series.labels.push_back(divergence[r][0]);
            series.x.push_back(static_cast<double>(series.x.size()));
            series.y.push_back(cell_to_double(divergence[r][3]));
        }
        if (config.emit_svg)
            svg::write_bar_chart(out_path(config, "fig_divergence_by_poet.svg"),
                                 "Individuality (D_JS) by poet", series);
    }

    {
        CsvWriter w(out_path(config, "fig_abstention_vs_js.csv"));
        w.raw("poet").raw("abstain_rate").raw("d_js");
        w.end_row();
        svg::Series series;
        for (const auto& poet : corpus.poets) {
            auto it = js_by_poet.find(poet);
            if (it == js_by_poet.end()) continue;
            w.text(poet).num(shapes.at(poet).abstain_rate()).num(it->second);
            w.end_row();
            series.labels.push_back(poet);
            series.x.push_back(shapes.at(poet).abstain_rate());
            series.y.push_back(it->second);
        }
        if (config.emit_svg)
            svg::write_scatter(out_path(config, "fig_abstention_vs_js.svg"),
                               "Abstention rate vs individuality", series, "abstain_rate", "d_js");
    }

    {
        const auto& header = distributions[0];
        CsvWriter w(out_path(config, "fig_poet_concept_heatmap.csv"));
        for (const auto& cell : header) w.text(cell);
        w.end_row();
        std::vector<std::string> row_names;
        std::vector<double> values;
        for (std::size_t r = 1; r < distributions.size(); ++r) {
            row_names.push_back(distributions[r][0]);
            for (std::size_t c = 0; c < distributions[r].size(); ++c) {
                if (c == 0)
                    w.text(distributions[r][c]);
                else {
                    w.raw(distributions[r][c]);
                    values.push_back(cell_to_double(distributions[r][c]));
                }
            }
            w.end_row();
        }
        if (config.emit_svg)
            svg::write_heatmap(out_path(config, "fig_poet_concept_heatmap.svg"),
                               "Poet x concept shares", row_names,
                               {header.begin() + 1, header.end()}, values);
    }

    {
        const auto& header = coords[0];
        std::size_t em2_col = 0, em3_col = 0;
        for (std::size_t c = 1; c < header.size(); ++c) {
            if (header[c] == "em2") em2_col = c;
            if (header[c] == "em3") em3_col = c;
        }
        if (em2_col == 0 || em3_col == 0)
            throw DataError("coords.csv lacks em2/em3; rerun the spectral stage with --k-max >= 3");
        CsvWriter w(out_path(config, "fig_em2_em3.csv"));
        w.raw("poet").raw("em2").raw("em3").raw("verse_count").raw("d_js");
        w.end_row();
        svg::Series series;
        for (std::size_t r = 1; r < coords.size(); ++r) {
            const std::string& poet = coords[r][0];
            const long verse_count =
                verses_by_poet.count(poet) ? verses_by_poet.at(poet)
                                           : (shapes.count(poet) ? shapes.at(poet).verses : 0);
            const double d_js = js_by_poet.count(poet) ? js_by_poet.at(poet) : 0.0;
            w.text(poet)
                .raw(coords[r][em2_col])
                .raw(coords[r][em3_col])
                .integer(verse_count)
                .num(d_js);
            w.end_row();
            series.labels.push_back(poet);
            series.x.push_back(cell_to_double(coords[r][em2_col]));
            series.y.push_back(cell_to_double(coords[r][em3_col]));
        }
        if (config.emit_svg)
            svg::write_scatter(out_path(config, "fig_em2_em3.svg"), "Embedding (EM2 vs EM3)",
                               series, "em2", "em3");
    }
    write_config(config, "report");
}

void cmd_annotate_mock(const RunConfig& config) {
    if (config.verses_path.empty() || config.responses_path.empty())
        throw UsageError("annotate-mock needs --verses and --responses");
    ensure_out_dir(config);

    std::ifstream verses_in(config.verses_path);
    if (!verses_in) throw DataError("cannot open verses file: " + config.verses_path);
    std::string prompt_template;
    if (!config.prompt_path.empty()) {
        std::ifstream t(config.prompt_path, std::ios::binary);
        if (!t) throw DataError("cannot open prompt template: " + config.prompt_path);
        prompt_template.assign((std::istreambuf_iterator<char>(t)),
                               std::istreambuf_iterator<char>());
    }

    ScriptedBackend backend(load_response_fixture(config.responses_path));
    std::ofstream annotations(out_path(config, "annotations.jsonl"), std::ios::binary);
    CsvWriter attempts(out_path(config, "attempts.csv"));
    attempts.raw("verse_line").raw("attempts").raw("status");
    attempts.end_row();

    std::string verse;
    int line = 0;
    while (std::getline(verses_in, verse)) {
        ++line;
        if (verse.empty()) continue;
        AnnotationRequest req;
        req.verse_text = verse;
        if (!prompt_template.empty()) req.prompt_text = render_prompt(prompt_template, verse);
        auto [record, log] = annotate_with_retry(req, backend);
        record.poet = "mock";
        record.source_line = line;
        if (record.text.empty()) record.text = verse;
        annotations << serialize_record(record) << "\n";
        attempts.integer(line)
            .integer(static_cast<long>(log.attempts.size()))
            .raw(log.final_status == AttemptStatus::Ok ? "ok" : "exhausted");
        attempts.end_row();
    }
    write_config(config, "annotate-mock");
}

int run_guarded(void (*command)(const RunConfig&), const RunConfig& config) {
    try {
        command(config);
        return kExitOk;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace eigenmood::cli
