#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace annotator {

// Decodes one UTF-8 sequence starting at `pos`; invalid bytes decode to
// U+FFFD with length 1 so arbitrary input never faults.
struct DecodedCodepoint {
  char32_t value;
  std::size_t length;
};
DecodedCodepoint decode_utf8(std::string_view text, std::size_t pos);

void append_utf8(std::string& out, char32_t cp);

std::string_view trim(std::string_view text);
std::string trim_copy(std::string_view text);

// Lowercases via Unicode simple case folding.
std::string fold_case(std::string_view text);

bool starts_with_insensitive(std::string_view text, std::string_view prefix);

// Case-folds, maps curly apostrophes/quotes to ASCII, collapses whitespace
// runs to single spaces. Used for refusal matching and echo detection, never
// for extracted content.
std::string normalize_loose(std::string_view text);

std::vector<std::string> split_lines(std::string_view text);

// Whitespace+punctuation token count used when a backend omits usage.
// Word characters group into one token; every other visible codepoint
// counts as its own token.
std::size_t estimate_tokens(std::string_view text);

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace annotator
