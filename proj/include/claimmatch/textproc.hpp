#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace claimmatch {

struct ByteSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const ByteSpan&) const = default;
};

struct Token {
    std::string surface;  // case-folded
    ByteSpan span;        // offsets into the source text
};

/// Splits text into maximal runs of letters and digits of any script.
/// Combining marks continue a run but never start one, so Devanagari
/// vowel signs stay attached while emoji presentation selectors are
/// dropped. Surfaces are lowercased with the simple 1:1 Unicode mapping.
/// Invalid UTF-8 bytes are treated as separators.
std::vector<Token> tokenize(std::string_view text);

/// Surfaces only.
std::vector<std::string> tokenize_terms(std::string_view text);

std::size_t token_count(std::string_view text);

/// Byte offset just past the n-th token (or text.size() when the text has
/// at most n tokens). Used to truncate input for length-limited models.
std::size_t prefix_end_after_tokens(std::string_view text, std::size_t n);

std::string lowercase(std::string_view text);

// Code point helpers. Malformed UTF-8 decodes to U+FFFD, one byte at a time.
char32_t next_code_point(std::string_view text, std::size_t& pos);
std::vector<char32_t> decode_utf8(std::string_view text);
void append_utf8(std::string& out, char32_t cp);

std::string_view trim(std::string_view s);
std::string_view rtrim(std::string_view s);

}  // namespace claimmatch
