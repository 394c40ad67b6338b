#include "doctest.h"
#include "eigenmood/text.hpp"

using namespace eigenmood;

namespace {

const NormalizationPolicy kFull{true, true, true};
const NormalizationPolicy kNoStrip{true, true, false};

}  // namespace

TEST_CASE("whitespace runs collapse to single spaces and ends trim") {
    NormalizationPolicy p{false, true, false};
    CHECK(normalize_text("a  b ", p) == "a b");
    CHECK(normalize_text("  a\t\tb\r\n c  ", p) == "a b c");
    CHECK(normalize_text("", p) == "");
    CHECK(normalize_text("   ", p) == "");
}

TEST_CASE("already-normalized ASCII is unchanged") {
    CHECK(normalize_text("plain ascii text", kFull) == "plain ascii text");
}

TEST_CASE("NFKC folds compatibility forms") {
    CHECK(normalize_text("ﬁre", kNoStrip) == "fire");          // ligature fi
    CHECK(normalize_text("Ａscii", kNoStrip) == "Ascii");       // fullwidth A
    CHECK(normalize_text("ﮊام", kNoStrip) == "ژام");  // presentation form
    // NBSP is whitespace once NFKC turns it into a plain space
    CHECK(normalize_text("x  y", kFull) == "x y");
}

TEST_CASE("NFKC composes combining sequences") {
    // decomposed e + combining acute vs precomposed
    CHECK(normalize_text("éclair", kNoStrip) == "éclair");
}

TEST_CASE("strings differing only in combining diacritics collide after stripping") {
    const std::string with_marks = "عِشق";  // contains a kasra
    const std::string without = "عشق";
    CHECK(normalize_text(with_marks, kFull) == without);
    CHECK(dedup_key(with_marks, kFull) == dedup_key(without, kFull));
    // without stripping they stay distinct
    CHECK(dedup_key(with_marks, kNoStrip) != dedup_key(without, kNoStrip));
}

TEST_CASE("normalization is total on ill-formed UTF-8") {
    std::string bad = "ok";
    bad += static_cast<char>(0xFF);
    bad += "still ok";
    CHECK_NOTHROW(normalize_text(bad, kFull));
    NormalizationPolicy none{false, false, false};
    CHECK(normalize_text(bad, none) == bad);
}

TEST_CASE("dedup key is a pure function of policy and text") {
    const std::string text = "Some  Verse text";
    CHECK(dedup_key(text, kFull) == dedup_key(text, kFull));
    CHECK(dedup_key(text, kFull) == normalize_text(text, kFull));
}
