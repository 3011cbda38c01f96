#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace annotator {

enum class ParseErrorKind {
  MissingSection,
  ParaphraseCountMismatch,
  SeparatorMissing,
  RefusalDetected,
  MissingLine,
  EmptyField,
  NoTranslation,
};

std::string parse_error_kind_name(ParseErrorKind kind);

struct ParseError {
  ParseErrorKind kind;
  std::string detail;  // section/line label, or refusal pattern
  int expected = 0;    // ParaphraseCountMismatch
  int found = 0;       // ParaphraseCountMismatch, SeparatorMissing line index

  std::string message() const;
};

template <typename T>
struct ParseResult {
  std::optional<T> value;
  std::optional<ParseError> error;

  bool ok() const { return value.has_value(); }

  static ParseResult success(T parsed) {
    return ParseResult{std::move(parsed), std::nullopt};
  }
  static ParseResult failure(ParseError err) {
    return ParseResult{std::nullopt, std::move(err)};
  }
};

// ---- refusal detection ----

using RefusalPatterns = std::vector<std::string>;

// "I don't know", "Sure! here's", "I cannot", "As an AI".
const RefusalPatterns& default_refusal_patterns();

// True for blank input or when any pattern occurs as a case-folded,
// quote-normalised substring.
bool detect_refusal(std::string_view raw,
                    const RefusalPatterns& patterns = default_refusal_patterns());

// ---- captioning ----

struct ParaphrasePair {
  std::string english;
  std::string target;

  bool operator==(const ParaphrasePair&) const = default;
};

struct CaptioningParse {
  std::string translation;
  std::vector<ParaphrasePair> paraphrases;

  bool operator==(const CaptioningParse&) const = default;
};

// Expects a `Translation:` line followed by exactly n `Paraphrase k:` lines,
// each split on the first ` / ` into (english, target). Labels match
// case-insensitively with optional punctuation after the number; blank and
// unrecognised lines between sections are skipped. Extracted strings are
// verbatim input substrings modulo edge-whitespace trimming.
ParseResult<CaptioningParse> parse_captioning(
    std::string_view raw, int n,
    const RefusalPatterns& patterns = default_refusal_patterns());

// parse_captioning plus the echo check: a translation equal to the English
// input (case/whitespace-normalised) fails with NoTranslation.
ParseResult<CaptioningParse> validate_captioning(
    std::string_view raw, int n, std::string_view english_input,
    const RefusalPatterns& patterns = default_refusal_patterns());

// ---- text style transfer ----

struct TstParse {
  std::string paraphrase_formal_en;
  std::string paraphrase_informal_en;
  // Target-language lines in section order: Formal 1, Informal 1,
  // Formal 2, Informal 2.
  std::string translation_formal_1;
  std::string translation_informal_1;
  std::string translation_formal_2;
  std::string translation_informal_2;

  bool operator==(const TstParse&) const = default;
};

// Locates the `[Paraphrase]` section (Formal 2 / Informal 2 lines) and the
// `[Translation in <language>]` section (all four lines). When
// `expected_language` is set the translation header must name it.
ParseResult<TstParse> parse_tst(
    std::string_view raw,
    const std::optional<std::string>& expected_language = std::nullopt,
    const RefusalPatterns& patterns = default_refusal_patterns());

}  // namespace annotator
