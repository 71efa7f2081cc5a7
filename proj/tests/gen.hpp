// Random input generators for property tests.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "claimmatch/random.hpp"
#include "claimmatch/textproc.hpp"

namespace gen {

// Mixed-script text: Latin words, Devanagari syllables with vowel signs and
// virama, CJK, digits, emoji with variation selectors, ZWJ, punctuation,
// sentence ends, assorted whitespace and the odd invalid byte.
inline std::string unicode_text(claimmatch::Rng& rng, std::size_t pieces, bool allow_invalid = true) {
    static const char32_t punct[] = {U',', U';', U'-', U'"', U'(', U')', U'\'', U'/', U':'};
    static const char32_t ends[] = {U'.', U'!', U'?', 0x0964, 0x0965};
    static const char32_t spaces[] = {U' ', U' ', U' ', U'\n', U'\t', 0x00A0, 0x3000};
    std::string s;
    for (std::size_t i = 0; i < pieces; ++i) {
        switch (rng.below(12)) {
            case 0:
            case 1:
            case 2: {
                const std::size_t n = 1 + rng.below(8);
                for (std::size_t j = 0; j < n; ++j) {
                    char32_t c = rng.below(4) == 0 ? U'A' + rng.below(26) : U'a' + rng.below(26);
                    claimmatch::append_utf8(s, c);
                }
                break;
            }
            case 3:
            case 4: {
                const std::size_t n = 1 + rng.below(4);
                for (std::size_t j = 0; j < n; ++j) {
                    claimmatch::append_utf8(s, 0x0915 + static_cast<char32_t>(rng.below(37)));
                    const auto r = rng.below(4);
                    if (r == 0) claimmatch::append_utf8(s, 0x093E + static_cast<char32_t>(rng.below(11)));
                    if (r == 1) claimmatch::append_utf8(s, 0x094D);  // virama
                    if (r == 2) claimmatch::append_utf8(s, 0x0902);  // anusvara
                }
                break;
            }
            case 5:
                for (std::size_t j = 0, n = 1 + rng.below(3); j < n; ++j) {
                    claimmatch::append_utf8(s, 0x4E00 + static_cast<char32_t>(rng.below(500)));
                }
                break;
            case 6:
                for (std::size_t j = 0, n = 1 + rng.below(4); j < n; ++j) {
                    claimmatch::append_utf8(s, U'0' + static_cast<char32_t>(rng.below(10)));
                }
                break;
            case 7:
                claimmatch::append_utf8(s, 0x1F600 + static_cast<char32_t>(rng.below(40)));
                if (rng.below(2)) claimmatch::append_utf8(s, 0xFE0F);
                if (rng.below(3) == 0) claimmatch::append_utf8(s, 0x200D);
                break;
            case 8:
                claimmatch::append_utf8(s, punct[rng.below(std::size(punct))]);
                break;
            case 9:
                claimmatch::append_utf8(s, ends[rng.below(std::size(ends))]);
                claimmatch::append_utf8(s, U' ');
                break;
            case 10:
                if (allow_invalid && rng.below(4) == 0) {
                    s += static_cast<char>(0x80 + rng.below(0x40));
                } else {
                    claimmatch::append_utf8(s, 0x00C0 + static_cast<char32_t>(rng.below(0x17F - 0xC0)));
                }
                break;
            default:
                claimmatch::append_utf8(s, spaces[rng.below(std::size(spaces))]);
                break;
        }
        if (rng.below(3) == 0) s += ' ';
    }
    return s;
}

inline std::vector<std::string> word_list(claimmatch::Rng& rng, std::size_t n) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n; ++i) words.push_back("w" + std::to_string(i) + std::string(1, 'a' + rng.below(26)));
    return words;
}

}  // namespace gen
