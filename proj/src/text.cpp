#include "eigenmood/text.hpp"

#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>
#include <unicode/utf8.h>

#include <stdexcept>
#include <vector>

namespace eigenmood {

namespace {

std::string nfkc(const std::string& in) {
    UErrorCode status = U_ZERO_ERROR;
    const UNormalizer2* norm = unorm2_getNFKCInstance(&status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFKC instance unavailable");

    // UTF-8 -> UTF-16, substituting U+FFFD for ill-formed sequences.
    std::vector<UChar> u16(in.size() + 1);
    int32_t u16len = 0;
    status = U_ZERO_ERROR;
    u_strFromUTF8WithSub(u16.data(), static_cast<int32_t>(u16.size()), &u16len,
                         in.data(), static_cast<int32_t>(in.size()), 0xFFFD, nullptr, &status);
    if (status == U_BUFFER_OVERFLOW_ERROR) {
        u16.resize(static_cast<std::size_t>(u16len) + 1);
        status = U_ZERO_ERROR;
        u_strFromUTF8WithSub(u16.data(), static_cast<int32_t>(u16.size()), &u16len,
                             in.data(), static_cast<int32_t>(in.size()), 0xFFFD, nullptr, &status);
    }
    if (U_FAILURE(status)) throw std::runtime_error("UTF-8 decode failed");

    std::vector<UChar> out16(u16len * 3 + 16);
    status = U_ZERO_ERROR;
    int32_t out16len = unorm2_normalize(norm, u16.data(), u16len,
                                        out16.data(), static_cast<int32_t>(out16.size()), &status);
    if (status == U_BUFFER_OVERFLOW_ERROR) {
        out16.resize(static_cast<std::size_t>(out16len));
        status = U_ZERO_ERROR;
        out16len = unorm2_normalize(norm, u16.data(), u16len,
                                    out16.data(), static_cast<int32_t>(out16.size()), &status);
    }
    if (U_FAILURE(status)) throw std::runtime_error("NFKC normalization failed");

    std::string out(static_cast<std::size_t>(out16len) * 4 + 4, '\0');
    int32_t out8len = 0;
    status = U_ZERO_ERROR;
    u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &out8len,
                out16.data(), out16len, &status);
    if (U_FAILURE(status)) throw std::runtime_error("UTF-8 encode failed");
    out.resize(static_cast<std::size_t>(out8len));
    return out;
}

void append_utf8(std::string& out, UChar32 cp) {
    char buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool err = false;
    U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, cp, err);
    if (!err) out.append(buf, static_cast<std::size_t>(len));
}

// Walks code points; negative cp marks an ill-formed byte that is passed
// through verbatim so normalization stays total.
template <typename Fn>
void for_each_codepoint(const std::string& in, Fn&& fn) {
    const auto* bytes = reinterpret_cast<const uint8_t*>(in.data());
    int32_t i = 0;
    const auto n = static_cast<int32_t>(in.size());
    while (i < n) {
        int32_t start = i;
        UChar32 cp;
        U8_NEXT(bytes, i, n, cp);
        fn(cp, start, i);
    }
}

std::string collapse_ws(const std::string& in) {
    std::string out;
    out.reserve(in.size());
    bool pending_space = false;
    bool seen_content = false;
    for_each_codepoint(in, [&](UChar32 cp, int32_t start, int32_t end) {
        const bool is_ws = cp >= 0 && (u_isUWhiteSpace(cp) || cp == '\t' || cp == '\r' || cp == '\n');
        if (is_ws) {
            pending_space = seen_content;
            return;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        seen_content = true;
        if (cp < 0) {
            out.append(in, static_cast<std::size_t>(start), static_cast<std::size_t>(end - start));
        } else {
            append_utf8(out, cp);
        }
    });
    return out;
}

std::string strip_marks(const std::string& in) {
    std::string out;
    out.reserve(in.size());
    for_each_codepoint(in, [&](UChar32 cp, int32_t start, int32_t end) {
        if (cp >= 0 && u_charType(cp) == U_NON_SPACING_MARK) return;
        if (cp < 0) {
            out.append(in, static_cast<std::size_t>(start), static_cast<std::size_t>(end - start));
        } else {
            append_utf8(out, cp);
        }
    });
    return out;
}

}  // namespace

std::string normalize_text(const std::string& text, const NormalizationPolicy& policy) {
    std::string s = text;
    if (policy.unicode_nfkc) s = nfkc(s);
    if (policy.collapse_whitespace) s = collapse_ws(s);
    if (policy.strip_diacritics_for_dedup) s = strip_marks(s);
    return s;
}

std::string dedup_key(const std::string& text, const NormalizationPolicy& policy) {
    return normalize_text(text, policy);
}

}  // namespace eigenmood
