#include "eigenmood/gateway.hpp"

#include <fstream>

#include "eigenmood/ingest.hpp"
#include "json.hpp"

namespace eigenmood {

std::vector<std::string> load_response_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open response fixture: " + path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_array())
        throw DataError("response fixture must be a JSON array of strings: " + path);
    std::vector<std::string> out;
    out.reserve(doc.size());
    for (const auto& item : doc) {
        if (!item.is_string())
            throw DataError("response fixture entries must be strings: " + path);
        out.push_back(item.get<std::string>());
    }
    return out;
}

ParseResult validate_annotation_payload(const std::string& raw) {
    // Responses carry no poet field and no line context; the caller attaches
    // provenance afterwards. The record validator is shared with ingest.
    return parse_record(raw, /*poet_hint=*/"", /*line_no=*/0);
}

namespace {

std::string truncate_for_note(const std::string& raw) {
    constexpr std::size_t kNoteLimit = 200;
    if (raw.size() <= kNoteLimit) return raw;
    return raw.substr(0, kNoteLimit);
}

}  // namespace

std::pair<AnnotatedVerse, AnnotationAttemptLog>
annotate_with_retry(const AnnotationRequest& req, TextBackend& backend) {
    AnnotationAttemptLog log;
    const std::string& prompt = req.prompt_text.empty() ? req.verse_text : req.prompt_text;
    std::string last_raw;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::string raw;
        bool transport_ok = true;
        try {
            raw = backend.generate(prompt);
        } catch (const std::exception& e) {
            raw = std::string("<transport failure: ") + e.what() + ">";
            transport_ok = false;
        }
        last_raw = raw;
        ParseResult res = transport_ok
                              ? validate_annotation_payload(raw)
                              : ParseResult(SchemaError{SchemaErrorKind::InvalidStructure, raw, 0});
        const bool valid = is_ok(res);
        log.attempts.push_back({raw, valid});
        if (valid) {
            log.final_status = AttemptStatus::Ok;
            AnnotatedVerse v = get_verse(res);
            return {std::move(v), std::move(log)};
        }
    }
    log.final_status = AttemptStatus::Exhausted;
    AnnotatedVerse fallback;
    fallback.text = req.verse_text;
    fallback.abstain = true;
    fallback.notes = "invalid output after 5 retries: " + truncate_for_note(last_raw);
    return {std::move(fallback), std::move(log)};
}

std::string render_prompt(const std::string& template_text, const std::string& verse_text) {
    static constexpr std::string_view slot = "{{VERSE}}";
    std::string out = template_text;
    if (auto pos = out.find(slot); pos != std::string::npos)
        out.replace(pos, slot.size(), verse_text);
    else
        out += "\n" + verse_text + "\n";
    return out;
}

}  // namespace eigenmood
