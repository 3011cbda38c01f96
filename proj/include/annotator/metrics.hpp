#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "annotator/corpus.hpp"

namespace annotator {

inline constexpr const char* kTokenizerId = "uax29-fold-v1";
inline constexpr double kRougeBeta = 1.2;

struct TokenizedSentence {
  std::vector<std::string> tokens;
  LanguageTag language;
};

// Word-boundary segmentation in the UAX-29 style: runs of letters, marks,
// and digits form word tokens (with ' kept word-internal between letters
// and . , kept internal between ASCII digits); dash punctuation and
// whitespace separate without producing tokens; every other visible
// codepoint is its own token. Tokens are simple-case-folded.
TokenizedSentence tokenize(std::string_view text, const LanguageTag& language);

using Tokens = std::vector<std::string>;
using ReferenceSet = std::vector<Tokens>;

// ---- BLEU ----

struct NgramStats {
  std::uint64_t matches = 0;  // clipped by max per-reference count
  std::uint64_t total = 0;    // candidate n-grams
};

NgramStats clipped_ngram_stats(const Tokens& candidate,
                               const ReferenceSet& references, int n);

enum class BleuSmoothing { None, AddOne };

// Corpus BLEU over n = 1..4, scaled to [0,100]. Brevity penalty uses the
// per-sentence closest reference length (ties break to the shorter one).
// Without smoothing any zero n-gram precision zeroes the score; AddOne
// applies (m+1)/(t+1) for n >= 2.
double bleu_corpus(const std::vector<Tokens>& candidates,
                   const std::vector<ReferenceSet>& references,
                   BleuSmoothing smoothing = BleuSmoothing::None);

// ---- ROUGE-L ----

std::size_t lcs_length(const Tokens& a, const Tokens& b);

double rouge_l_sentence(const Tokens& candidate, const ReferenceSet& references);
double rouge_l_corpus(const std::vector<Tokens>& candidates,
                      const std::vector<ReferenceSet>& references);

// ---- METEOR-lite ----
// Exact-match unigram alignment only; no stemming or synonymy stages, so
// scores are not comparable with full METEOR. Every report carries the
// variant id below.

inline constexpr const char* kMeteorLiteVariant = "meteor-lite-exact-v1";

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

// Maximal exact-unigram alignment; chunks are kept low with a deterministic
// longest-common-run-first strategy (exact chunk minimisation over maximal
// matchings is NP-hard in general).
MeteorAlignment meteor_align(const Tokens& candidate, const Tokens& reference);

double meteor_lite_sentence(const Tokens& candidate,
                            const ReferenceSet& references);
double meteor_lite_corpus(const std::vector<Tokens>& candidates,
                          const std::vector<ReferenceSet>& references);

// ---- dataset evaluation ----

struct SentenceScores {
  std::string id;
  std::optional<double> bleu;
  std::optional<double> rouge_l;
  std::optional<double> meteor_lite;
};

struct EvalReport {
  std::string tokenizer_id = kTokenizerId;
  std::optional<double> bleu;         // [0,100]
  std::optional<double> rouge_l;      // [0,1]
  std::optional<double> meteor_lite;  // [0,1]
  std::size_t candidates = 0;
  std::size_t references_min = 0;
  std::size_t references_max = 0;
  std::map<std::string, std::string> variants;
  std::optional<std::vector<SentenceScores>> per_sentence;
};

struct EvalOptions {
  std::set<std::string> metrics = {"bleu", "rouge_l", "meteor_lite"};
  LanguageTag language{"en", "English"};
  BleuSmoothing smoothing = BleuSmoothing::None;
  bool per_sentence = false;
};

EvalReport evaluate_dataset(const std::filesystem::path& candidate_file,
                            const std::filesystem::path& reference_file,
                            const EvalOptions& options);

std::string render_eval_json(const EvalReport& report);
std::string render_eval_table(const EvalReport& report);

}  // namespace annotator
