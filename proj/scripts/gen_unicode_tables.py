#!/usr/bin/env python3
"""Regenerates src/unicode_tables.inc (case folding and diacritic stripping)."""
import sys
import unicodedata

RANGES = [(0x00C0, 0x024F), (0x0370, 0x03FF), (0x0400, 0x04FF), (0x1E00, 0x1EFF)]


def codepoints():
    for lo, hi in RANGES:
        yield from range(lo, hi + 1)


def main(out):
    folds, strips = [], []
    for cp in codepoints():
        ch = chr(cp)
        if unicodedata.category(ch) == "Cn":
            continue
        f = ch.casefold()
        if f != ch:
            folds.append((cp, [ord(c) for c in f]))
        decomposed = unicodedata.normalize("NFD", ch)
        base = "".join(c for c in decomposed if not unicodedata.combining(c))
        if base != ch and len(base) == 1:
            strips.append((cp, ord(base)))
    w = out.write
    w("// Generated by scripts/gen_unicode_tables.py. Do not edit.\n\n")
    w("struct FoldEntry { char32_t from; char32_t to[3]; };\n")
    w("struct StripEntry { char32_t from; char32_t to; };\n\n")
    w("constexpr FoldEntry kFoldTable[] = {\n")
    for cp, to in folds:
        padded = to + [0] * (3 - len(to))
        w("    {0x%04X, {0x%04X, 0x%04X, 0x%04X}},\n" % (cp, *padded))
    w("};\n\nconstexpr StripEntry kStripTable[] = {\n")
    for cp, base in strips:
        w("    {0x%04X, 0x%04X},\n" % (cp, base))
    w("};\n")


if __name__ == "__main__":
    main(sys.stdout)
