#include "eigenmood/ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace eigenmood {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

SchemaError err(SchemaErrorKind kind, std::string msg, int line) {
    return SchemaError{kind, std::move(msg), line};
}

}  // namespace

std::string_view schema_error_kind_name(SchemaErrorKind kind) {
    switch (kind) {
        case SchemaErrorKind::InvalidStructure: return "invalid-structure";
        case SchemaErrorKind::MissingField: return "missing-field";
        case SchemaErrorKind::WrongType: return "wrong-type";
        case SchemaErrorKind::UnknownLabel: return "unknown-label";
        case SchemaErrorKind::ConfidenceRange: return "confidence-range";
        case SchemaErrorKind::KeyMismatch: return "key-mismatch";
        case SchemaErrorKind::InconsistentAbstain: return "inconsistent-abstain";
    }
    return "unknown";
}

ParseResult parse_record(const std::string& line, const std::string& poet_hint,
                         int line_no, const ParseOptions& opts,
                         std::vector<std::string>* warnings) {
    json rec = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (rec.is_discarded() || !rec.is_object())
        return err(SchemaErrorKind::InvalidStructure, "record is not a JSON object", line_no);

    AnnotatedVerse v;
    v.source_line = line_no;

    auto it = rec.find("input_verse");
    if (it == rec.end())
        return err(SchemaErrorKind::MissingField, "missing field: input_verse", line_no);
    if (!it->is_string())
        return err(SchemaErrorKind::WrongType, "input_verse must be a string", line_no);
    v.text = it->get<std::string>();

    it = rec.find("abstain");
    if (it == rec.end())
        return err(SchemaErrorKind::MissingField, "missing field: abstain", line_no);
    if (!it->is_boolean())
        return err(SchemaErrorKind::WrongType, "abstain must be a boolean", line_no);
    v.abstain = it->get<bool>();

    it = rec.find("labels");
    if (it == rec.end())
        return err(SchemaErrorKind::MissingField, "missing field: labels", line_no);
    if (!it->is_array())
        return err(SchemaErrorKind::WrongType, "labels must be an array", line_no);
    std::set<Concept> seen;
    for (const auto& item : *it) {
        if (!item.is_string())
            return err(SchemaErrorKind::WrongType, "labels entries must be strings", line_no);
        const auto name = item.get<std::string>();
        auto c = concept_from_name(name);
        if (!c)
            return err(SchemaErrorKind::UnknownLabel, "label outside ontology: " + name, line_no);
        if (!seen.insert(*c).second)
            return err(SchemaErrorKind::WrongType, "duplicate label: " + name, line_no);
    }

    it = rec.find("confidences");
    if (it == rec.end())
        return err(SchemaErrorKind::MissingField, "missing field: confidences", line_no);
    if (!it->is_object())
        return err(SchemaErrorKind::WrongType, "confidences must be an object", line_no);

    std::map<Concept, double> confs;
    for (const auto& [key, value] : it->items()) {
        auto c = concept_from_name(key);
        if (!c)
            return err(SchemaErrorKind::UnknownLabel, "confidence key outside ontology: " + key, line_no);
        if (!seen.count(*c))
            return err(SchemaErrorKind::KeyMismatch,
                       "confidence key not in labels: " + key, line_no);
        if (!value.is_number())
            return err(SchemaErrorKind::WrongType, "confidence must be numeric: " + key, line_no);
        const double p = value.get<double>();
        if (!(p >= 0.0 && p <= 1.0))
            return err(SchemaErrorKind::ConfidenceRange,
                       "confidence outside [0,1] for " + key, line_no);
        confs[*c] = p;
    }
    for (Concept c : seen) {
        if (!confs.count(c)) {
            if (!opts.lenient)
                return err(SchemaErrorKind::KeyMismatch,
                           std::string("label without confidence: ") + std::string(concept_name(c)),
                           line_no);
            confs[c] = 0.0;  // imputed; non-commitment beats invention
            if (warnings)
                warnings->push_back("line " + std::to_string(line_no) +
                                    ": imputed confidence 0.0 for " +
                                    std::string(concept_name(c)));
        }
    }

    if (v.abstain && (!seen.empty() || !confs.empty()))
        return err(SchemaErrorKind::InconsistentAbstain,
                   "abstained record carries labels", line_no);

    v.labels.reserve(confs.size());
    for (const auto& [c, p] : confs) v.labels.push_back({c, p});

    if (auto r = rec.find("rationale"); r != rec.end()) {
        if (!r->is_object())
            return err(SchemaErrorKind::WrongType, "rationale must be an object", line_no);
        for (const auto& [key, value] : r->items()) {
            if (!value.is_string())
                return err(SchemaErrorKind::WrongType, "rationale entries must be strings", line_no);
            v.rationale[key] = value.get<std::string>();
        }
    }
    if (auto n = rec.find("notes"); n != rec.end()) {
        if (!n->is_string())
            return err(SchemaErrorKind::WrongType, "notes must be a string", line_no);
        v.notes = n->get<std::string>();
    }
    if (auto p = rec.find("poet"); p != rec.end()) {
        if (!p->is_string())
            return err(SchemaErrorKind::WrongType, "poet must be a string", line_no);
        v.poet = p->get<std::string>();  // explicit field wins over filename hint
    } else {
        v.poet = poet_hint;
    }
    if (auto l = rec.find("line"); l != rec.end()) {
        // Snapshots carry the original source line so verse refs survive
        // across pipeline stages; explicit value wins over file position.
        if (!l->is_number_integer() || l->get<long>() < 1)
            return err(SchemaErrorKind::WrongType, "line must be an integer >= 1", line_no);
        v.source_line = static_cast<int>(l->get<long>());
    }
    return v;
}

std::string serialize_record(const AnnotatedVerse& v) {
    ordered_json rec;
    rec["input_verse"] = v.text;
    auto labels = json::array();
    auto confs = ordered_json::object();
    for (const auto& li : v.labels) {
        labels.push_back(std::string(concept_name(li.label)));
        confs[std::string(concept_name(li.label))] = li.confidence;
    }
    rec["labels"] = labels;
    rec["confidences"] = confs;
    auto rat = ordered_json::object();
    for (const auto& [k, s] : v.rationale) rat[k] = s;
    rec["rationale"] = rat;
    rec["abstain"] = v.abstain;
    rec["notes"] = v.notes;
    rec["poet"] = v.poet;
    rec["line"] = v.source_line;
    return rec.dump();
}

std::string poet_from_filename(const std::string& path) {
    std::string stem = std::filesystem::path(path).stem().string();
    static constexpr std::string_view suffix = "_labels";
    if (stem.size() > suffix.size() &&
        stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0)
        stem.resize(stem.size() - suffix.size());
    return stem;
}

Corpus load_corpus(const std::vector<std::string>& paths, const LoadOptions& opts,
                   LoadReport* report) {
    // Stored text keeps its diacritics; stripping only affects dedup keys.
    NormalizationPolicy text_policy = opts.normalization;
    text_policy.strip_diacritics_for_dedup = false;

    std::vector<std::string> sorted_paths = paths;
    std::sort(sorted_paths.begin(), sorted_paths.end(),
              [](const std::string& a, const std::string& b) {
                  return poet_from_filename(a) < poet_from_filename(b);
              });

    Corpus corpus;
    for (const auto& path : sorted_paths) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open input file: " + path);
        const std::string hint = poet_from_filename(path);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::vector<std::string> warnings;
            ParseOptions popts{.lenient = !opts.strict};
            ParseResult res = parse_record(line, hint, line_no, popts, &warnings);
            if (report)
                for (auto& w : warnings)
                    report->warnings.push_back({path, hint, line_no, w});
            if (!is_ok(res)) {
                const auto& e = get_error(res);
                const std::string msg =
                    std::string(schema_error_kind_name(e.kind)) + ": " + e.message;
                if (opts.strict)
                    throw DataError(path + ":" + std::to_string(line_no) + ": " + msg);
                if (report) report->errors.push_back({path, hint, line_no, msg});
                continue;
            }
            AnnotatedVerse v = get_verse(res);
            v.text = normalize_text(v.text, text_policy);
            corpus.verses.push_back(std::move(v));
        }
    }

    std::stable_sort(corpus.verses.begin(), corpus.verses.end(),
                     [](const AnnotatedVerse& a, const AnnotatedVerse& b) {
                         if (a.poet != b.poet) return a.poet < b.poet;
                         return a.source_line < b.source_line;
                     });
    for (const auto& v : corpus.verses)
        if (corpus.poets.empty() || corpus.poets.back() != v.poet)
            corpus.poets.push_back(v.poet);
    return corpus;
}

std::pair<Corpus, DedupReport> dedup_corpus(const Corpus& corpus,
                                            const NormalizationPolicy& policy) {
    Corpus out;
    DedupReport report;
    std::unordered_map<std::string, std::unordered_map<std::string, int>> first_seen;
    for (const auto& v : corpus.verses) {
        auto& keys = first_seen[v.poet];
        const std::string key = dedup_key(v.text, policy);
        auto [it, inserted] = keys.emplace(key, v.source_line);
        if (!inserted) {
            report.removed.push_back({v.poet, v.source_line, it->second});
            continue;
        }
        out.verses.push_back(v);
    }
    for (const auto& v : out.verses)
        if (out.poets.empty() || out.poets.back() != v.poet)
            out.poets.push_back(v.poet);
    return {std::move(out), std::move(report)};
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats s;
    std::unordered_map<std::string, std::size_t> poet_slot;
    for (const auto& poet : corpus.poets) {
        poet_slot[poet] = s.per_poet.size();
        s.per_poet.push_back({poet, 0, 0, 0.0, 0, 0.0});
    }

    double conf_sum = 0.0;
    std::vector<double> poet_conf_sum(s.per_poet.size(), 0.0);
    for (const auto& v : corpus.verses) {
        auto& p = s.per_poet[poet_slot.at(v.poet)];
        ++s.verses;
        ++p.verses;
        if (v.abstain) {
            ++s.abstained;
            ++p.abstained;
            continue;
        }
        for (const auto& li : v.labels) {
            ++s.label_instances;
            ++p.label_instances;
            conf_sum += li.confidence;
            poet_conf_sum[poet_slot.at(v.poet)] += li.confidence;
            if (!s.confidence_defined) {
                s.confidence_min = s.confidence_max = li.confidence;
                s.confidence_defined = true;
            } else {
                s.confidence_min = std::min(s.confidence_min, li.confidence);
                s.confidence_max = std::max(s.confidence_max, li.confidence);
            }
        }
    }

    if (s.verses > 0) {
        s.abstain_rate = static_cast<double>(s.abstained) / static_cast<double>(s.verses);
        s.abstain_rate_defined = true;
    }
    const long annotated = s.verses - s.abstained;
    if (annotated > 0) {
        s.labels_per_annotated_verse =
            static_cast<double>(s.label_instances) / static_cast<double>(annotated);
        s.labels_per_verse_defined = true;
    }
    if (s.label_instances > 0)
        s.confidence_mean = conf_sum / static_cast<double>(s.label_instances);
    for (std::size_t i = 0; i < s.per_poet.size(); ++i) {
        auto& p = s.per_poet[i];
        if (p.verses > 0)
            p.abstain_rate = static_cast<double>(p.abstained) / static_cast<double>(p.verses);
        if (p.label_instances > 0)
            p.mean_confidence = poet_conf_sum[i] / static_cast<double>(p.label_instances);
    }
    return s;
}

}  // namespace eigenmood
