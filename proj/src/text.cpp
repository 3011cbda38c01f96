#include "annotator/text.hpp"

#include <cctype>
#include <cstddef>

#include "annotator/unicode.hpp"

namespace annotator {

namespace {

bool range_contains(const detail::CodepointRange* ranges, std::size_t count,
                    char32_t cp) {
  std::size_t lo = 0;
  std::size_t hi = count;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (cp < ranges[mid].first) {
      hi = mid;
    } else if (cp > ranges[mid].last) {
      lo = mid + 1;
    } else {
      return true;
    }
  }
  return false;
}

}  // namespace

bool is_word_codepoint(char32_t cp) {
  return range_contains(detail::kWordRanges, detail::kWordRanges_count, cp);
}

bool is_space_codepoint(char32_t cp) {
  return range_contains(detail::kSpaceRanges, detail::kSpaceRanges_count, cp);
}

bool is_dash_codepoint(char32_t cp) {
  return range_contains(detail::kDashRanges, detail::kDashRanges_count, cp);
}

char32_t simple_fold(char32_t cp) {
  std::size_t lo = 0;
  std::size_t hi = detail::kFoldPairs_count;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (cp < detail::kFoldPairs[mid].from) {
      hi = mid;
    } else if (cp > detail::kFoldPairs[mid].from) {
      lo = mid + 1;
    } else {
      return detail::kFoldPairs[mid].to;
    }
  }
  return cp;
}

DecodedCodepoint decode_utf8(std::string_view text, std::size_t pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(text[i]);
  };
  const unsigned char b0 = byte(pos);
  if (b0 < 0x80) return {b0, 1};

  std::size_t len = 0;
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
    return {0xFFFD, 1};
  }
  if (pos + len > text.size()) return {0xFFFD, 1};
  for (std::size_t i = 1; i < len; ++i) {
    const unsigned char b = byte(pos + i);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  // Reject overlong encodings and surrogates.
  if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
      (len == 4 && cp < 0x10000) || (cp >= 0xD800 && cp <= 0xDFFF) ||
      cp > 0x10FFFF) {
    return {0xFFFD, 1};
  }
  return {cp, len};
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

std::string_view trim(std::string_view text) {
  const auto is_ascii_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_ascii_space(text[begin])) ++begin;
  while (end > begin && is_ascii_space(text[end - 1])) --end;
  return text.substr(begin, end - begin);
}

std::string trim_copy(std::string_view text) { return std::string(trim(text)); }

std::string fold_case(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto [cp, len] = decode_utf8(text, pos);
    append_utf8(out, simple_fold(cp));
    pos += len;
  }
  return out;
}

bool starts_with_insensitive(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const auto a = static_cast<unsigned char>(text[i]);
    const auto b = static_cast<unsigned char>(prefix[i]);
    if (std::tolower(a) != std::tolower(b)) return false;
  }
  return true;
}

std::string normalize_loose(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  bool pending_space = false;
  while (pos < text.size()) {
    auto [cp, len] = decode_utf8(text, pos);
    pos += len;
    if (cp == 0x2018 || cp == 0x2019 || cp == 0x0060) cp = '\'';
    if (cp == 0x201C || cp == 0x201D) cp = '"';
    if (is_space_codepoint(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    append_utf8(out, simple_fold(cp));
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      std::string_view line = text.substr(start, i - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.emplace_back(line);
      start = i + 1;
    }
  }
  return lines;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::size_t estimate_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto [cp, len] = decode_utf8(text, pos);
    pos += len;
    if (is_space_codepoint(cp)) {
      in_word = false;
    } else if (is_word_codepoint(cp)) {
      if (!in_word) ++count;
      in_word = true;
    } else {
      ++count;
      in_word = false;
    }
  }
  return count;
}

}  // namespace annotator
