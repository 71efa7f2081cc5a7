#!/usr/bin/env python3
"""Regenerates src/unicode_tables.inc from Python's unicodedata.

Word classes:
  1 = starts or continues a token (L*, N*)
  2 = continues a token only (M*)
Lowercase mapping keeps only 1:1 code point mappings.
"""
import sys
import unicodedata

MAX_CP = 0x10FFFF


def word_class(cp):
    cat = unicodedata.category(chr(cp))
    if cat[0] in "LN":
        return 1
    if cat[0] == "M":
        return 2
    return 0


def ranges():
    out = []
    start, cur = 0, word_class(0)
    for cp in range(1, MAX_CP + 1):
        c = word_class(cp)
        if c != cur:
            if cur:
                out.append((start, cp - 1, cur))
            start, cur = cp, c
    if cur:
        out.append((start, MAX_CP, cur))
    return out


def lower_pairs():
    out = []
    for cp in range(MAX_CP + 1):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        low = chr(cp).lower()
        if len(low) == 1 and ord(low) != cp:
            out.append((cp, ord(low)))
    return out


def main():
    lines = [
        "// Generated by tools/gen_unicode_tables.py (Unicode %s). Do not edit."
        % unicodedata.unidata_version,
        "",
        "constexpr WordRange kWordRanges[] = {",
    ]
    for lo, hi, c in ranges():
        lines.append("    {0x%X, 0x%X, %d}," % (lo, hi, c))
    lines.append("};")
    lines.append("")
    lines.append("constexpr LowerPair kLowerPairs[] = {")
    for src, dst in lower_pairs():
        lines.append("    {0x%X, 0x%X}," % (src, dst))
    lines.append("};")
    sys.stdout.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
