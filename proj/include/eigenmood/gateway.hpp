#pragma once

#include <memory>
#include <string>
#include <vector>

#include "eigenmood/verse.hpp"

namespace eigenmood {

struct AnnotationRequest {
    std::string verse_text;                       // one verse, no cross-verse context
    std::string prompt_template_id = "default";
    std::string prompt_text;                      // rendered instruction; verse_text when empty
};

// Text-generation backend: request text in, response text out. A throwing
// generate() is treated as one invalid attempt (transport failure).
class TextBackend {
public:
    virtual ~TextBackend() = default;
    virtual std::string generate(const std::string& prompt) = 0;
};

// Replays a fixed sequence of canned responses; throws once exhausted.
class ScriptedBackend : public TextBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    std::string generate(const std::string&) override {
        if (next_ >= responses_.size())
            throw std::runtime_error("scripted backend exhausted");
        return responses_[next_++];
    }

    std::size_t calls() const { return next_; }

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

// Loads a fixture file holding a JSON array of canned response strings.
std::vector<std::string> load_response_fixture(const std::string& path);

struct AnnotationAttempt {
    std::string raw_response;
    bool valid = false;
};

enum class AttemptStatus { Ok, Exhausted };

struct AnnotationAttemptLog {
    std::vector<AnnotationAttempt> attempts;  // at most kMaxAttempts
    AttemptStatus final_status = AttemptStatus::Ok;
};

inline constexpr int kMaxAttempts = 5;

// Accepts only a single well-formed record matching the output schema,
// including the abstain consistency rule.
ParseResult validate_annotation_payload(const std::string& raw);

// Issues up to kMaxAttempts generations; the first valid payload wins. On
// exhaustion returns an abstained record whose notes field carries the
// failure trace.
std::pair<AnnotatedVerse, AnnotationAttemptLog>
annotate_with_retry(const AnnotationRequest& req, TextBackend& backend);

// Instruction template shipped under assets/; {{VERSE}} marks the slot the
// gateway fills per request.
std::string render_prompt(const std::string& template_text, const std::string& verse_text);

}  // namespace eigenmood
