#pragma once

// Brute-force oracles for metric checks. These deliberately avoid the hash
// maps and DP of the production code: LCS enumerates every subsequence and
// clipped counting rescans token ranges pairwise.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "annotator/rng.hpp"

namespace oracles {

using Tokens = std::vector<std::string>;

inline bool is_subsequence(const Tokens& needle, const Tokens& haystack) {
  std::size_t pos = 0;
  for (const std::string& token : haystack) {
    if (pos < needle.size() && token == needle[pos]) ++pos;
  }
  return pos == needle.size();
}

// Max length over all 2^|a| subsequences of `a` that also occur in `b`.
inline std::size_t lcs_by_enumeration(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  const std::size_t subsets = std::size_t{1} << a.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    Tokens subsequence;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask & (std::size_t{1} << i)) subsequence.push_back(a[i]);
    }
    if (subsequence.size() > best && is_subsequence(subsequence, b)) {
      best = subsequence.size();
    }
  }
  return best;
}

inline std::vector<Tokens> ngrams_of(const Tokens& tokens, int n) {
  std::vector<Tokens> out;
  if (tokens.size() < static_cast<std::size_t>(n)) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    out.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                     tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
  }
  return out;
}

inline std::uint64_t count_occurrences(const std::vector<Tokens>& grams,
                                       const Tokens& gram) {
  std::uint64_t count = 0;
  for (const Tokens& candidate : grams) {
    if (candidate == gram) ++count;
  }
  return count;
}

// Clipped matches by pairwise rescanning.
inline std::uint64_t clipped_matches_by_counting(
    const Tokens& candidate, const std::vector<Tokens>& references, int n) {
  const auto cand_grams = ngrams_of(candidate, n);
  std::vector<std::vector<Tokens>> ref_grams;
  ref_grams.reserve(references.size());
  for (const Tokens& reference : references) {
    ref_grams.push_back(ngrams_of(reference, n));
  }
  std::uint64_t clipped = 0;
  std::vector<Tokens> seen;
  for (const Tokens& gram : cand_grams) {
    if (count_occurrences(seen, gram) > 0) continue;
    seen.push_back(gram);
    std::uint64_t max_ref = 0;
    for (const auto& grams : ref_grams) {
      max_ref = std::max(max_ref, count_occurrences(grams, gram));
    }
    clipped += std::min(count_occurrences(cand_grams, gram), max_ref);
  }
  return clipped;
}

// Random sentence over a small alphabet, |tokens| in [min_len, max_len].
inline Tokens random_sentence(annotator::SplitMix64& rng, int alphabet,
                              int min_len, int max_len) {
  const int span = max_len - min_len + 1;
  const int length =
      min_len + static_cast<int>(rng.next() % static_cast<std::uint64_t>(span));
  Tokens out;
  out.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    out.push_back(std::string(1, static_cast<char>(
                                     'a' + rng.next() %
                                               static_cast<std::uint64_t>(
                                                   alphabet))));
  }
  return out;
}

}  // namespace oracles
