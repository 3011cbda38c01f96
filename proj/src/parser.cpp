#include "annotator/parser.hpp"

#include <cctype>

#include "annotator/text.hpp"

namespace annotator {

namespace {

// Matches `<keyword> :` (case-insensitive); returns the trimmed content.
std::optional<std::string> match_label(std::string_view line,
                                       std::string_view keyword) {
  const std::string_view trimmed = trim(line);
  if (!starts_with_insensitive(trimmed, keyword)) return std::nullopt;
  std::size_t pos = keyword.size();
  while (pos < trimmed.size() && trimmed[pos] == ' ') ++pos;
  if (pos >= trimmed.size() || trimmed[pos] != ':') return std::nullopt;
  return trim_copy(trimmed.substr(pos + 1));
}

struct NumberedLine {
  int number;
  std::string content;
};

// Matches `<keyword> <k>:` allowing `.`/`)` after the number.
std::optional<NumberedLine> match_numbered_label(std::string_view line,
                                                 std::string_view keyword) {
  const std::string_view trimmed = trim(line);
  if (!starts_with_insensitive(trimmed, keyword)) return std::nullopt;
  std::size_t pos = keyword.size();
  if (pos >= trimmed.size() || trimmed[pos] != ' ') return std::nullopt;
  while (pos < trimmed.size() && trimmed[pos] == ' ') ++pos;
  int number = 0;
  bool any_digit = false;
  while (pos < trimmed.size() &&
         std::isdigit(static_cast<unsigned char>(trimmed[pos]))) {
    number = number * 10 + (trimmed[pos] - '0');
    any_digit = true;
    ++pos;
  }
  if (!any_digit) return std::nullopt;
  while (pos < trimmed.size() && (trimmed[pos] == '.' || trimmed[pos] == ')')) {
    ++pos;
  }
  while (pos < trimmed.size() && trimmed[pos] == ' ') ++pos;
  if (pos >= trimmed.size() || trimmed[pos] != ':') return std::nullopt;
  return NumberedLine{number, trim_copy(trimmed.substr(pos + 1))};
}

bool is_section_header(std::string_view line, std::string_view name) {
  const std::string folded = fold_case(trim(line));
  return folded == "[" + fold_case(name) + "]";
}

// `[Translation in French]` → "French".
std::optional<std::string> match_translation_header(std::string_view line) {
  const std::string_view trimmed = trim(line);
  constexpr std::string_view kPrefix = "[translation in ";
  if (!starts_with_insensitive(trimmed, kPrefix)) return std::nullopt;
  if (trimmed.empty() || trimmed.back() != ']') return std::nullopt;
  return trim_copy(
      trimmed.substr(kPrefix.size(), trimmed.size() - kPrefix.size() - 1));
}

ParseError refusal_error(std::string detail) {
  return ParseError{ParseErrorKind::RefusalDetected, std::move(detail)};
}

}  // namespace

std::string parse_error_kind_name(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::MissingSection: return "MissingSection";
    case ParseErrorKind::ParaphraseCountMismatch:
      return "ParaphraseCountMismatch";
    case ParseErrorKind::SeparatorMissing: return "SeparatorMissing";
    case ParseErrorKind::RefusalDetected: return "RefusalDetected";
    case ParseErrorKind::MissingLine: return "MissingLine";
    case ParseErrorKind::EmptyField: return "EmptyField";
    case ParseErrorKind::NoTranslation: return "NoTranslation";
  }
  return "Unknown";
}

std::string ParseError::message() const {
  switch (kind) {
    case ParseErrorKind::MissingSection:
      return "missing section \"" + detail + "\"";
    case ParseErrorKind::ParaphraseCountMismatch:
      return "expected " + std::to_string(expected) + " paraphrases, found " +
             std::to_string(found);
    case ParseErrorKind::SeparatorMissing:
      return "paraphrase " + std::to_string(found) +
             " lacks the \" / \" separator";
    case ParseErrorKind::RefusalDetected:
      return detail.empty() ? "refusal detected"
                            : "refusal detected (" + detail + ")";
    case ParseErrorKind::MissingLine:
      return "missing line \"" + detail + "\"";
    case ParseErrorKind::EmptyField:
      return "empty field \"" + detail + "\"";
    case ParseErrorKind::NoTranslation:
      return "translation repeats the English input";
  }
  return "parse error";
}

const RefusalPatterns& default_refusal_patterns() {
  static const RefusalPatterns patterns = {
      "i don't know",
      "sure! here's",
      "i cannot",
      "as an ai",
  };
  return patterns;
}

bool detect_refusal(std::string_view raw, const RefusalPatterns& patterns) {
  const std::string normalized = normalize_loose(raw);
  if (normalized.empty()) return true;
  for (const std::string& pattern : patterns) {
    if (normalized.find(normalize_loose(pattern)) != std::string::npos) {
      return true;
    }
  }
  return false;
}

ParseResult<CaptioningParse> parse_captioning(std::string_view raw, int n,
                                              const RefusalPatterns& patterns) {
  using Result = ParseResult<CaptioningParse>;
  if (detect_refusal(raw, patterns)) {
    return Result::failure(refusal_error(""));
  }

  std::optional<std::string> translation;
  std::vector<std::string> paraphrase_lines;
  for (const std::string& line : split_lines(raw)) {
    if (!translation) {
      if (auto content = match_label(line, "translation")) {
        translation = std::move(*content);
        continue;
      }
    }
    if (auto numbered = match_numbered_label(line, "paraphrase")) {
      paraphrase_lines.push_back(std::move(numbered->content));
    }
  }

  if (!translation) {
    return Result::failure(
        ParseError{ParseErrorKind::MissingSection, "Translation"});
  }
  if (translation->empty()) {
    return Result::failure(ParseError{ParseErrorKind::EmptyField, "Translation"});
  }
  if (paraphrase_lines.size() != static_cast<std::size_t>(n)) {
    ParseError error{ParseErrorKind::ParaphraseCountMismatch, ""};
    error.expected = n;
    error.found = static_cast<int>(paraphrase_lines.size());
    return Result::failure(error);
  }

  CaptioningParse parsed;
  parsed.translation = std::move(*translation);
  for (std::size_t i = 0; i < paraphrase_lines.size(); ++i) {
    const std::string& line = paraphrase_lines[i];
    const std::size_t separator = line.find(" / ");
    const int ordinal = static_cast<int>(i) + 1;
    if (separator == std::string::npos) {
      ParseError error{ParseErrorKind::SeparatorMissing, ""};
      error.found = ordinal;
      return Result::failure(error);
    }
    ParaphrasePair pair;
    pair.english = trim_copy(line.substr(0, separator));
    pair.target = trim_copy(line.substr(separator + 3));
    if (pair.english.empty() || pair.target.empty()) {
      return Result::failure(
          ParseError{ParseErrorKind::EmptyField,
                     "Paraphrase " + std::to_string(ordinal)});
    }
    parsed.paraphrases.push_back(std::move(pair));
  }
  return Result::success(std::move(parsed));
}

ParseResult<CaptioningParse> validate_captioning(std::string_view raw, int n,
                                                 std::string_view english_input,
                                                 const RefusalPatterns& patterns) {
  auto result = parse_captioning(raw, n, patterns);
  if (!result.ok()) return result;
  if (normalize_loose(result.value->translation) ==
      normalize_loose(english_input)) {
    return ParseResult<CaptioningParse>::failure(
        ParseError{ParseErrorKind::NoTranslation, ""});
  }
  return result;
}

ParseResult<TstParse> parse_tst(std::string_view raw,
                                const std::optional<std::string>& expected_language,
                                const RefusalPatterns& patterns) {
  using Result = ParseResult<TstParse>;
  if (detect_refusal(raw, patterns)) {
    return Result::failure(refusal_error(""));
  }

  const std::vector<std::string> lines = split_lines(raw);
  std::optional<std::size_t> paraphrase_at;
  std::optional<std::size_t> translation_at;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!paraphrase_at && is_section_header(lines[i], "Paraphrase")) {
      paraphrase_at = i;
      continue;
    }
    if (!translation_at) {
      if (auto language = match_translation_header(lines[i])) {
        if (!expected_language ||
            fold_case(*language) == fold_case(*expected_language)) {
          translation_at = i;
        }
      }
    }
  }

  if (!paraphrase_at) {
    return Result::failure(
        ParseError{ParseErrorKind::MissingSection, "Paraphrase"});
  }
  const std::string translation_section =
      "Translation in " + expected_language.value_or("<language>");
  if (!translation_at) {
    return Result::failure(
        ParseError{ParseErrorKind::MissingSection, translation_section});
  }

  const auto find_line = [&](std::size_t begin, std::size_t end,
                             std::string_view keyword,
                             int number) -> std::optional<std::string> {
    for (std::size_t i = begin; i < end && i < lines.size(); ++i) {
      if (auto numbered = match_numbered_label(lines[i], keyword)) {
        if (numbered->number == number) return std::move(numbered->content);
      }
    }
    return std::nullopt;
  };

  const std::size_t paraphrase_end =
      *translation_at > *paraphrase_at ? *translation_at : lines.size();

  TstParse parsed;
  struct Wanted {
    std::string* slot;
    const char* keyword;
    int number;
    std::size_t begin;
    std::size_t end;
    const char* label;
  };
  const Wanted wanted[] = {
      {&parsed.paraphrase_formal_en, "formal", 2, *paraphrase_at + 1,
       paraphrase_end, "Formal 2"},
      {&parsed.paraphrase_informal_en, "informal", 2, *paraphrase_at + 1,
       paraphrase_end, "Informal 2"},
      {&parsed.translation_formal_1, "formal", 1, *translation_at + 1,
       lines.size(), "Formal 1"},
      {&parsed.translation_informal_1, "informal", 1, *translation_at + 1,
       lines.size(), "Informal 1"},
      {&parsed.translation_formal_2, "formal", 2, *translation_at + 1,
       lines.size(), "Formal 2"},
      {&parsed.translation_informal_2, "informal", 2, *translation_at + 1,
       lines.size(), "Informal 2"},
  };
  for (const Wanted& want : wanted) {
    auto content = find_line(want.begin, want.end, want.keyword, want.number);
    if (!content) {
      return Result::failure(
          ParseError{ParseErrorKind::MissingLine, want.label});
    }
    if (content->empty()) {
      return Result::failure(ParseError{ParseErrorKind::EmptyField, want.label});
    }
    *want.slot = std::move(*content);
  }
  return Result::success(std::move(parsed));
}

}  // namespace annotator
