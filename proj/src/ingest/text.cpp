#include "hmtl/ingest/text.hpp"

#include "hmtl/errors.hpp"

namespace hmtl::ingest {

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        }
        bool ok = len > 0 && i + len <= text.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto b = static_cast<unsigned char>(text[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
            } else {
                cp = (cp << 6) | (b & 0x3F);
            }
        }
        if (!ok) {
            out.push_back(U'\uFFFD');
            i += 1;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

namespace {

// Latin Extended-A alternates case pairs; these are the ranges where the
// uppercase member sits on the even code point.
bool latin_ext_a_even_upper(char32_t c) {
    return (c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177);
}

bool latin_ext_a_odd_upper(char32_t c) {
    return (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
}

}  // namespace

bool is_upper(char32_t c) {
    if (c >= U'A' && c <= U'Z') return true;
    if (c >= 0xC0 && c <= 0xDE) return c != 0xD7;
    if (latin_ext_a_even_upper(c)) return c % 2 == 0;
    if (latin_ext_a_odd_upper(c)) return c % 2 == 1;
    if (c == 0x178) return true;
    if (c == 0x386 || (c >= 0x388 && c <= 0x38F)) return c != 0x38B && c != 0x38D;
    if (c >= 0x391 && c <= 0x3A9) return c != 0x3A2;
    if (c >= 0x400 && c <= 0x42F) return true;
    return false;
}

bool is_lower(char32_t c) {
    if (c >= U'a' && c <= U'z') return true;
    if (c >= 0xDF && c <= 0xFF) return c != 0xF7;
    if (latin_ext_a_even_upper(c)) return c % 2 == 1;
    if (latin_ext_a_odd_upper(c)) return c % 2 == 0;
    if (c == 0x138 || c == 0x149 || c == 0x17F) return true;
    if (c >= 0x3AC && c <= 0x3CE) return true;
    if (c >= 0x430 && c <= 0x45F) return true;
    return false;
}

bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019 || c == 0x02BC; }

char32_t to_lower(char32_t c) {
    if (!is_upper(c)) return c;
    if (c <= U'Z') return c + 32;
    if (c <= 0xDE) return c + 32;
    if (c == 0x130) return U'i';
    if (c == 0x178) return 0xFF;
    if (c < 0x180) return c + 1;
    if (c == 0x386) return 0x3AC;
    if (c >= 0x388 && c <= 0x38A) return c + 37;
    if (c == 0x38C) return 0x3CC;
    if (c == 0x38E || c == 0x38F) return c + 63;
    if (c >= 0x391 && c <= 0x3A9) return c + 32;
    if (c >= 0x400 && c <= 0x40F) return c + 80;
    if (c >= 0x410 && c <= 0x42F) return c + 32;
    return c;
}

std::string to_lower(std::string_view text) {
    std::u32string cps = decode_utf8(text);
    for (char32_t& c : cps) c = to_lower(c);
    return encode_utf8(cps);
}

CasingCategory classify_casing(std::string_view word) {
    if (word.empty()) {
        throw ContractError("classify_casing: empty word");
    }
    const std::u32string cps = decode_utf8(word);
    bool all_digits = true;
    std::size_t letters = 0;
    std::size_t upper = 0;
    bool first_letter_upper = false;
    bool rest_lower = true;
    for (char32_t c : cps) {
        if (is_apostrophe(c)) {
            return CasingCategory::Apostrophe;
        }
        all_digits = all_digits && is_digit(c);
        if (!is_letter(c)) continue;
        if (letters == 0) {
            first_letter_upper = is_upper(c);
        } else if (!is_lower(c)) {
            rest_lower = false;
        }
        ++letters;
        if (is_upper(c)) ++upper;
    }
    if (all_digits) return CasingCategory::Numeric;
    if (letters >= 2 && upper == letters) return CasingCategory::AllCaps;
    if (letters >= 1 && first_letter_upper && rest_lower) return CasingCategory::Title;
    return CasingCategory::Lower;
}

}  // namespace hmtl::ingest
