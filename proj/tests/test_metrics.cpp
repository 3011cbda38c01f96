#include <cmath>

#include "doctest.h"
#include "json.hpp"

#include "annotator/errors.hpp"
#include "annotator/io.hpp"
#include "annotator/metrics.hpp"
#include "annotator/rng.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace annotator;

namespace {

const LanguageTag kEnglish{"en", "English"};

Tokens toks(std::initializer_list<const char*> words) {
  Tokens out;
  for (const char* word : words) out.emplace_back(word);
  return out;
}

}  // namespace

TEST_CASE("tokenize folds case and separates punctuation") {
  CHECK(tokenize("A black dog and a spotted dog", kEnglish).tokens ==
        toks({"a", "black", "dog", "and", "a", "spotted", "dog"}));
  CHECK(tokenize("", kEnglish).tokens.empty());
  CHECK(tokenize("embrasse-la, mon frère.", {"fr", "French"}).tokens ==
        toks({"embrasse", "la", ",", "mon", "frère", "."}));
}

TEST_CASE("tokenize keeps contractions and numbers together") {
  CHECK(tokenize("don't stop", kEnglish).tokens == toks({"don't", "stop"}));
  CHECK(tokenize("pi is 3.14, sum 1,000", kEnglish).tokens ==
        toks({"pi", "is", "3.14", ",", "sum", "1,000"}));
  CHECK(tokenize("타석에 있는 남자들", {"ko", "Korean"}).tokens ==
        toks({"타석에", "있는", "남자들"}));
}

TEST_CASE("bleu identity and disjoint corpora hit the extremes") {
  const Tokens sentence = toks({"a", "black", "dog", "runs", "fast"});
  CHECK(bleu_corpus({sentence}, {{sentence}}) == doctest::Approx(100.0));

  const Tokens disjoint = toks({"x", "y", "z", "w", "v"});
  CHECK(bleu_corpus({disjoint}, {{sentence}}) == doctest::Approx(0.0));
}

TEST_CASE("modified unigram precision clips by the max reference count") {
  // The classic construction: a candidate of seven "the" against two
  // references holding at most two.
  const Tokens candidate(7, "the");
  const ReferenceSet references = {
      toks({"the", "cat", "is", "on", "the", "mat"}),
      toks({"there", "is", "a", "cat", "on", "the", "mat"})};
  const NgramStats stats = clipped_ngram_stats(candidate, references, 1);
  CHECK(stats.matches == 2);
  CHECK(stats.total == 7);
}

TEST_CASE("clipped n-gram counts match the brute-force oracle") {
  SplitMix64 rng(101);
  for (int round = 0; round < 200; ++round) {
    const Tokens candidate = oracles::random_sentence(rng, 5, 0, 10);
    ReferenceSet references;
    const int n_refs = 1 + static_cast<int>(rng.next() % 3);
    for (int r = 0; r < n_refs; ++r) {
      references.push_back(oracles::random_sentence(rng, 5, 0, 10));
    }
    for (int n = 1; n <= 4; ++n) {
      const NgramStats stats = clipped_ngram_stats(candidate, references, n);
      CHECK(stats.matches ==
            oracles::clipped_matches_by_counting(candidate, references, n));
      const std::size_t expected_total =
          candidate.size() >= static_cast<std::size_t>(n)
              ? candidate.size() - static_cast<std::size_t>(n) + 1
              : 0;
      CHECK(stats.total == expected_total);
    }
  }
}

TEST_CASE("corpus bleu is invariant under pair reordering") {
  SplitMix64 rng(55);
  std::vector<Tokens> candidates;
  std::vector<ReferenceSet> references;
  for (int i = 0; i < 12; ++i) {
    candidates.push_back(oracles::random_sentence(rng, 5, 4, 10));
    references.push_back({oracles::random_sentence(rng, 5, 4, 10),
                          oracles::random_sentence(rng, 5, 4, 10)});
  }
  const double base = bleu_corpus(candidates, references, BleuSmoothing::AddOne);

  const auto order = shuffled_indices(candidates.size(), 9);
  std::vector<Tokens> shuffled_candidates;
  std::vector<ReferenceSet> shuffled_references;
  for (const std::size_t i : order) {
    shuffled_candidates.push_back(candidates[i]);
    shuffled_references.push_back(references[i]);
  }
  CHECK(bleu_corpus(shuffled_candidates, shuffled_references,
                    BleuSmoothing::AddOne) == doctest::Approx(base));
}

TEST_CASE("bleu validates input shape") {
  CHECK_THROWS_AS(bleu_corpus({}, {}), LengthMismatchError);
  CHECK_THROWS_AS(bleu_corpus({toks({"a"})}, {}), LengthMismatchError);
  CHECK_THROWS_AS(bleu_corpus({toks({"a"})}, {{}}), EmptyReferenceSetError);
}

TEST_CASE("lcs length matches the enumeration oracle") {
  SplitMix64 rng(202);
  for (int round = 0; round < 200; ++round) {
    const Tokens a = oracles::random_sentence(rng, 5, 0, 10);
    const Tokens b = oracles::random_sentence(rng, 5, 0, 10);
    CHECK(lcs_length(a, b) == oracles::lcs_by_enumeration(a, b));
  }
}

TEST_CASE("rouge-l hits the reference values") {
  const Tokens sentence = toks({"a", "black", "dog"});
  CHECK(rouge_l_sentence(sentence, {sentence}) == doctest::Approx(1.0));
  CHECK(rouge_l_sentence(sentence, {toks({"x", "y", "z"})}) ==
        doctest::Approx(0.0));
  // LCS = 2 with P = R = 2/3, so any beta gives F = 2/3.
  CHECK(rouge_l_sentence(toks({"a", "b", "c"}), {toks({"a", "c", "d"})}) ==
        doctest::Approx(2.0 / 3.0));
  CHECK(rouge_l_sentence({}, {sentence}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(rouge_l_sentence(sentence, {}), EmptyReferenceSetError);
}

TEST_CASE("meteor-lite matches the closed-form cases") {
  CHECK(meteor_lite_sentence(toks({"a", "b"}), {toks({"x", "y"})}) ==
        doctest::Approx(0.0));

  const Tokens four = toks({"one", "two", "three", "four"});
  CHECK(std::abs(meteor_lite_sentence(four, {four}) - 127.0 / 128.0) < 1e-12);

  // One shared token in otherwise disjoint sentences: chunks = m = 1,
  // penalty = 0.5, so the score is half the harmonic mean.
  const Tokens candidate = toks({"a", "x", "y"});
  const Tokens reference = toks({"a", "p", "q"});
  const double precision = 1.0 / 3.0;
  const double recall = 1.0 / 3.0;
  const double fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
  CHECK(meteor_lite_sentence(candidate, {reference}) ==
        doctest::Approx(0.5 * fmean));
}

TEST_CASE("meteor alignment maximises matches with few chunks") {
  const MeteorAlignment identity =
      meteor_align(toks({"a", "b", "c"}), toks({"a", "b", "c"}));
  CHECK(identity.matches == 3);
  CHECK(identity.chunks == 1);

  const MeteorAlignment crossed =
      meteor_align(toks({"a", "b"}), toks({"b", "a"}));
  CHECK(crossed.matches == 2);
  CHECK(crossed.chunks == 2);

  // Matches are capped by per-token min counts.
  const MeteorAlignment repeated =
      meteor_align(toks({"a", "a", "a"}), toks({"a", "a"}));
  CHECK(repeated.matches == 2);
}

TEST_CASE("scores stay in range on random inputs") {
  SplitMix64 rng(303);
  for (int round = 0; round < 100; ++round) {
    const Tokens candidate = oracles::random_sentence(rng, 5, 0, 10);
    const ReferenceSet references = {oracles::random_sentence(rng, 5, 1, 10),
                                     oracles::random_sentence(rng, 5, 1, 10)};
    if (!candidate.empty()) {
      const double bleu = bleu_corpus({candidate}, {references});
      CHECK(bleu >= 0.0);
      CHECK(bleu <= 100.0);
    }
    const double rouge = rouge_l_sentence(candidate, references);
    CHECK(rouge >= 0.0);
    CHECK(rouge <= 1.0);
    const double meteor = meteor_lite_sentence(candidate, references);
    CHECK(meteor >= 0.0);
    CHECK(meteor <= 1.0);
  }
}

TEST_CASE("adding a reference never lowers rouge or meteor") {
  SplitMix64 rng(404);
  for (int round = 0; round < 100; ++round) {
    const Tokens candidate = oracles::random_sentence(rng, 5, 1, 10);
    ReferenceSet references = {oracles::random_sentence(rng, 5, 1, 10)};
    const double rouge_before = rouge_l_sentence(candidate, references);
    const double meteor_before = meteor_lite_sentence(candidate, references);
    references.push_back(oracles::random_sentence(rng, 5, 1, 10));
    CHECK(rouge_l_sentence(candidate, references) >= rouge_before);
    CHECK(meteor_lite_sentence(candidate, references) >= meteor_before);
  }
}

TEST_CASE("evaluate_dataset scores candidate files against references") {
  const auto dir = test_util::temp_dir("metrics");
  atomic_write_file(dir / "cand.json", R"([
    {"id": "s1", "text": "A black dog and a spotted dog"},
    {"id": "s2", "text": "Four people play tennis in doubles"}
  ])");
  atomic_write_file(dir / "refs.json", R"([
    {"id": "s1", "references": ["A black dog and a spotted dog",
                                "Two dogs outside"]},
    {"id": "s2", "references": ["Four people play tennis in doubles"]}
  ])");

  EvalOptions options;
  const EvalReport report =
      evaluate_dataset(dir / "cand.json", dir / "refs.json", options);
  CHECK(report.candidates == 2);
  CHECK(report.references_min == 1);
  CHECK(report.references_max == 2);
  CHECK(*report.bleu == doctest::Approx(100.0));
  CHECK(*report.rouge_l == doctest::Approx(1.0));
  CHECK(*report.meteor_lite > 0.9);

  const std::string json_text = render_eval_json(report);
  const auto doc = nlohmann::json::parse(json_text);
  CHECK(doc["tokenizer"] == "uax29-fold-v1");
  CHECK(doc["metrics"]["rouge_l"]["beta"] == doctest::Approx(1.2));
  CHECK(doc["variants"]["meteor_lite"] == "meteor-lite-exact-v1");

  EvalOptions bad = options;
  bad.metrics = {"bertscore"};
  CHECK_THROWS_AS(evaluate_dataset(dir / "cand.json", dir / "refs.json", bad),
                  UnsupportedMetricError);

  atomic_write_file(dir / "cand_extra.json", R"([
    {"id": "s1", "text": "a"}, {"id": "s3", "text": "b"}
  ])");
  CHECK_THROWS_AS(
      evaluate_dataset(dir / "cand_extra.json", dir / "refs.json", options),
      IdMismatchError);
}

TEST_CASE("per-sentence reporting is optional") {
  const auto dir = test_util::temp_dir("metrics_ps");
  atomic_write_file(dir / "cand.json",
                    R"([{"id": "s1", "text": "a black dog"}])");
  atomic_write_file(dir / "refs.json",
                    R"([{"id": "s1", "references": ["a black dog"]}])");
  EvalOptions options;
  options.per_sentence = true;
  const EvalReport report =
      evaluate_dataset(dir / "cand.json", dir / "refs.json", options);
  REQUIRE(report.per_sentence.has_value());
  REQUIRE(report.per_sentence->size() == 1);
  CHECK((*report.per_sentence)[0].id == "s1");
  CHECK(*(*report.per_sentence)[0].rouge_l == doctest::Approx(1.0));
}
