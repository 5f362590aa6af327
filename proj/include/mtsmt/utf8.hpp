#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mtsmt/error.hpp"

// Minimal UTF-8 handling for the corpus pipeline: decoding with strict
// validation, character classification for tokenization and script
// filtering, and case mapping for Latin (incl. Latin-1/Extended-A, which
// covers Polish), Greek and Cyrillic. Anything outside the mapped ranges
// lowercases to itself.

namespace mtsmt::utf8 {

// Throws EncodingError with the byte offset of the first invalid sequence.
std::vector<char32_t> decode(std::string_view text);

void append(std::string& out, char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

bool is_space(char32_t cp);
bool is_ascii_digit(char32_t cp);
// Letters and digits; everything that can sit inside a word.
bool is_word_char(char32_t cp);
// Not a word char and not whitespace.
bool is_punct_or_symbol(char32_t cp);

char32_t to_lower(char32_t cp);
std::string lower_copy(std::string_view utf8_text);

enum class Script { Latin, Cyrillic, Greek, Common, Other };

Script script_of(char32_t cp);
Script script_from_name(const std::string& name);  // "latin", "cyrillic", "greek"

// Number of code points (not bytes).
std::size_t length(std::string_view utf8_text);

}  // namespace mtsmt::utf8
