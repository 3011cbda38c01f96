#!/usr/bin/env python3
"""Regenerates src/unicode_tables.cpp.

Emits three sorted range tables (word characters, whitespace, dash
punctuation) and one sorted simple-case-fold mapping table derived from
the Python unicodedata database. Run from the repository root:

    python3 tools/gen_unicode_tables.py > src/unicode_tables.cpp
"""

import sys
import unicodedata

MAX_CP = 0x110000

WORD_CATEGORIES = ("L", "M", "N")  # letters, combining marks, numbers


def is_word(cp: int) -> bool:
    return unicodedata.category(chr(cp)).startswith(WORD_CATEGORIES)


def is_space(cp: int) -> bool:
    return chr(cp).isspace()


def is_dash(cp: int) -> bool:
    return unicodedata.category(chr(cp)) == "Pd"


def ranges(pred):
    out = []
    start = None
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            hit = False
        else:
            hit = pred(cp)
        if hit and start is None:
            start = cp
        elif not hit and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, MAX_CP - 1))
    return out


def fold_pairs():
    """One-to-one simple case foldings (multi-codepoint foldings are skipped)."""
    pairs = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        c = chr(cp)
        folded = c.casefold()
        if len(folded) != 1:
            folded = c.lower()
        if len(folded) == 1 and folded != c:
            pairs.append((cp, ord(folded[0])))
    return pairs


def emit_ranges(name, rs, out):
    out.write(f"const CodepointRange {name}[] = {{\n")
    for i in range(0, len(rs), 4):
        chunk = ", ".join(f"{{0x{a:X}, 0x{b:X}}}" for a, b in rs[i : i + 4])
        out.write(f"    {chunk},\n")
    out.write("};\n")
    out.write(f"const std::size_t {name}_count = {len(rs)};\n\n")


def main(out):
    word = ranges(is_word)
    space = ranges(is_space)
    dash = ranges(is_dash)
    folds = fold_pairs()

    out.write("// Generated by tools/gen_unicode_tables.py (Unicode %s). Do not edit.\n"
              % unicodedata.unidata_version)
    out.write("#include \"annotator/unicode.hpp\"\n\n")
    out.write("#include <cstddef>\n\n")
    out.write("namespace annotator::detail {\n\n")
    emit_ranges("kWordRanges", word, out)
    emit_ranges("kSpaceRanges", space, out)
    emit_ranges("kDashRanges", dash, out)
    out.write("const FoldPair kFoldPairs[] = {\n")
    for i in range(0, len(folds), 6):
        chunk = ", ".join(f"{{0x{a:X}, 0x{b:X}}}" for a, b in folds[i : i + 6])
        out.write(f"    {chunk},\n")
    out.write("};\n")
    out.write(f"const std::size_t kFoldPairs_count = {len(folds)};\n\n")
    out.write("}  // namespace annotator::detail\n")


if __name__ == "__main__":
    main(sys.stdout)
