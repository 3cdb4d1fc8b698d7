#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hmtl/ingest/sentence.hpp"

namespace hmtl::ingest {

// UTF-8 helpers covering the alphabets the toolkit cares about (Latin,
// Latin-1, Latin Extended-A, Greek, Cyrillic). Invalid bytes decode to
// U+FFFD one byte at a time, so decoding is total.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

bool is_upper(char32_t c);
bool is_lower(char32_t c);
inline bool is_letter(char32_t c) { return is_upper(c) || is_lower(c); }
inline bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }
bool is_apostrophe(char32_t c);

char32_t to_lower(char32_t c);
std::string to_lower(std::string_view text);

// Precedence: APOSTROPHE > NUMERIC > ALLCAPS > TITLE > LOWER.
// Throws ContractError on an empty word.
CasingCategory classify_casing(std::string_view word);

}  // namespace hmtl::ingest
