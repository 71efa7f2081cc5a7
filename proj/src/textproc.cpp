#include "claimmatch/textproc.hpp"

#include <algorithm>
#include <cstdint>
#include <iterator>

namespace claimmatch {
namespace {

struct WordRange {
    char32_t lo;
    char32_t hi;
    int cls;
};

struct LowerPair {
    char32_t from;
    char32_t to;
};

#include "unicode_tables.inc"

enum WordClass { kSeparator = 0, kWord = 1, kMark = 2, kJoiner = 3 };

WordClass classify(char32_t cp) {
    if (cp < 0x80) {
        if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9')) {
            return kWord;
        }
        return kSeparator;
    }
    if (cp == 0x200C || cp == 0x200D) return kJoiner;
    auto it = std::upper_bound(std::begin(kWordRanges), std::end(kWordRanges), cp,
                               [](char32_t c, const WordRange& r) { return c < r.lo; });
    if (it == std::begin(kWordRanges)) return kSeparator;
    --it;
    if (cp > it->hi) return kSeparator;
    return static_cast<WordClass>(it->cls);
}

char32_t to_lower(char32_t cp) {
    if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
    auto it = std::lower_bound(std::begin(kLowerPairs), std::end(kLowerPairs), cp,
                               [](const LowerPair& p, char32_t c) { return p.from < c; });
    if (it != std::end(kLowerPairs) && it->from == cp) return it->to;
    return cp;
}

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point at `pos`, advancing it. Malformed sequences yield
// kInvalid and consume a single byte.
char32_t next_cp(std::string_view s, std::size_t& pos) {
    auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    unsigned char b0 = byte(pos);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++pos;
        return kInvalid;
    }
    if (pos + len > s.size()) {
        ++pos;
        return kInvalid;
    }
    for (int i = 1; i < len; ++i) {
        unsigned char b = byte(pos + i);
        if ((b & 0xC0) != 0x80) {
            ++pos;
            return kInvalid;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++pos;
        return kInvalid;
    }
    pos += len;
    return cp;
}

template <typename OnToken>
void scan_tokens(std::string_view text, OnToken&& on_token) {
    std::size_t pos = 0;
    std::size_t start = 0;
    std::size_t end = 0;  // end of last word/mark code point in the run
    bool in_run = false;
    while (pos < text.size()) {
        std::size_t at = pos;
        char32_t cp = next_cp(text, pos);
        WordClass cls = cp == kInvalid ? kSeparator : classify(cp);
        if (cls == kWord) {
            if (!in_run) {
                in_run = true;
                start = at;
            }
            end = pos;
        } else if (cls == kMark) {
            if (in_run) end = pos;
        } else if (cls == kJoiner) {
            // ZWJ/ZWNJ keep a run open but are not counted into its end, so
            // a trailing joiner stays outside the token
        } else if (in_run) {
            on_token(start, end);
            in_run = false;
        }
    }
    if (in_run) on_token(start, end);
}

}  // namespace

std::string lowercase(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t at = pos;
        char32_t cp = next_cp(text, pos);
        if (cp == kInvalid) {
            out.append(text.substr(at, pos - at));
        } else {
            append_utf8(out, to_lower(cp));
        }
    }
    return out;
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    scan_tokens(text, [&](std::size_t b, std::size_t e) {
        tokens.push_back(Token{lowercase(text.substr(b, e - b)), ByteSpan{b, e}});
    });
    return tokens;
}

std::vector<std::string> tokenize_terms(std::string_view text) {
    std::vector<std::string> terms;
    scan_tokens(text, [&](std::size_t b, std::size_t e) { terms.push_back(lowercase(text.substr(b, e - b))); });
    return terms;
}

std::size_t token_count(std::string_view text) {
    std::size_t n = 0;
    scan_tokens(text, [&](std::size_t, std::size_t) { ++n; });
    return n;
}

std::size_t prefix_end_after_tokens(std::string_view text, std::size_t n) {
    std::size_t seen = 0;
    std::size_t cut = text.size();
    bool done = false;
    scan_tokens(text, [&](std::size_t, std::size_t e) {
        if (done) return;
        if (++seen == n) {
            cut = e;
            done = true;
        }
    });
    return n == 0 ? 0 : cut;
}

char32_t next_code_point(std::string_view text, std::size_t& pos) {
    char32_t cp = next_cp(text, pos);
    return cp == kInvalid ? char32_t{0xFFFD} : cp;
}

std::vector<char32_t> decode_utf8(std::string_view text) {
    std::vector<char32_t> out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = next_cp(text, pos);
        out.push_back(cp == kInvalid ? char32_t{0xFFFD} : cp);
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
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

namespace {
bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
}  // namespace

std::string_view rtrim(std::string_view s) {
    while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
    return rtrim(s);
}

}  // namespace claimmatch
