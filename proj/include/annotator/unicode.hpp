#pragma once

#include <cstddef>
#include <cstdint>

namespace annotator {

namespace detail {

struct CodepointRange {
  char32_t first;
  char32_t last;
};

struct FoldPair {
  char32_t from;
  char32_t to;
};

extern const CodepointRange kWordRanges[];
extern const std::size_t kWordRanges_count;
extern const CodepointRange kSpaceRanges[];
extern const std::size_t kSpaceRanges_count;
extern const CodepointRange kDashRanges[];
extern const std::size_t kDashRanges_count;
extern const FoldPair kFoldPairs[];
extern const std::size_t kFoldPairs_count;

}  // namespace detail

// Letters, combining marks, and numbers form word tokens.
bool is_word_codepoint(char32_t cp);
bool is_space_codepoint(char32_t cp);
// Dash punctuation (category Pd) separates words without producing a token.
bool is_dash_codepoint(char32_t cp);

// Unicode simple case folding; identity for codepoints without a
// one-to-one folding.
char32_t simple_fold(char32_t cp);

}  // namespace annotator
