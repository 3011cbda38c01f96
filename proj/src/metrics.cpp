#include "annotator/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "json.hpp"

#include "annotator/errors.hpp"
#include "annotator/io.hpp"
#include "annotator/text.hpp"
#include "annotator/unicode.hpp"

namespace annotator {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Static chunking keeps per-index work assignment (and thus any reduction
// done in index order) deterministic.
template <typename Fn>
void parallel_for(std::size_t n, const Fn& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>({hw, n, 8});
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (std::thread& t : threads) t.join();
}

bool is_ascii_digit(char32_t cp) { return cp >= '0' && cp <= '9'; }

std::string ngram_key(const Tokens& tokens, std::size_t start, int n) {
  std::string key;
  for (int k = 0; k < n; ++k) {
    if (k) key.push_back('\x1f');
    key += tokens[start + static_cast<std::size_t>(k)];
  }
  return key;
}

std::unordered_map<std::string, std::uint64_t> ngram_counts(const Tokens& tokens,
                                                            int n) {
  std::unordered_map<std::string, std::uint64_t> counts;
  if (tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size();
       ++i) {
    ++counts[ngram_key(tokens, i, n)];
  }
  return counts;
}

std::size_t closest_reference_length(std::size_t candidate_length,
                                     const ReferenceSet& references) {
  std::size_t best = references.front().size();
  for (const Tokens& reference : references) {
    const std::size_t len = reference.size();
    const auto distance = [&](std::size_t l) {
      return l > candidate_length ? l - candidate_length : candidate_length - l;
    };
    if (distance(len) < distance(best) ||
        (distance(len) == distance(best) && len < best)) {
      best = len;
    }
  }
  return best;
}

double safe_mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

TokenizedSentence tokenize(std::string_view text, const LanguageTag& language) {
  std::vector<char32_t> cps;
  cps.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto [cp, len] = decode_utf8(text, pos);
    cps.push_back(simple_fold(cp));
    pos += len;
  }

  TokenizedSentence out;
  out.language = language;
  std::string word;
  const auto flush = [&] {
    if (!word.empty()) {
      out.tokens.push_back(std::move(word));
      word.clear();
    }
  };

  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (is_word_codepoint(cp)) {
      append_utf8(word, cp);
      continue;
    }
    const bool has_prev = !word.empty();
    const bool next_word = i + 1 < cps.size() && is_word_codepoint(cps[i + 1]);
    if ((cp == '\'' || cp == 0x2019) && has_prev && next_word) {
      append_utf8(word, cp);  // mid-letter apostrophe: don't → one token
      continue;
    }
    if ((cp == '.' || cp == ',') && i > 0 && is_ascii_digit(cps[i - 1]) &&
        i + 1 < cps.size() && is_ascii_digit(cps[i + 1]) && has_prev) {
      append_utf8(word, cp);  // mid-number: 3.14 / 1,000 stay together
      continue;
    }
    flush();
    if (is_space_codepoint(cp) || is_dash_codepoint(cp)) continue;
    std::string punct;
    append_utf8(punct, cp);
    out.tokens.push_back(std::move(punct));
  }
  flush();
  return out;
}

NgramStats clipped_ngram_stats(const Tokens& candidate,
                               const ReferenceSet& references, int n) {
  NgramStats stats;
  const auto cand_counts = ngram_counts(candidate, n);
  if (candidate.size() >= static_cast<std::size_t>(n)) {
    stats.total = candidate.size() - static_cast<std::size_t>(n) + 1;
  }
  std::unordered_map<std::string, std::uint64_t> max_ref_counts;
  for (const Tokens& reference : references) {
    for (const auto& [gram, count] : ngram_counts(reference, n)) {
      auto& best = max_ref_counts[gram];
      best = std::max(best, count);
    }
  }
  for (const auto& [gram, count] : cand_counts) {
    const auto it = max_ref_counts.find(gram);
    if (it != max_ref_counts.end()) {
      stats.matches += std::min(count, it->second);
    }
  }
  return stats;
}

double bleu_corpus(const std::vector<Tokens>& candidates,
                   const std::vector<ReferenceSet>& references,
                   BleuSmoothing smoothing) {
  if (candidates.size() != references.size()) {
    throw LengthMismatchError("candidate and reference counts differ");
  }
  if (candidates.empty()) {
    throw LengthMismatchError("corpus is empty");
  }
  constexpr int kMaxN = 4;

  struct SentenceStats {
    NgramStats ngrams[kMaxN];
    std::uint64_t candidate_length = 0;
    std::uint64_t reference_length = 0;
  };
  std::vector<SentenceStats> per_sentence(candidates.size());

  for (const ReferenceSet& refs : references) {
    if (refs.empty()) {
      throw EmptyReferenceSetError("every candidate needs a reference");
    }
  }

  parallel_for(candidates.size(), [&](std::size_t i) {
    SentenceStats& stats = per_sentence[i];
    for (int n = 1; n <= kMaxN; ++n) {
      stats.ngrams[n - 1] = clipped_ngram_stats(candidates[i], references[i], n);
    }
    stats.candidate_length = candidates[i].size();
    stats.reference_length =
        closest_reference_length(candidates[i].size(), references[i]);
  });

  std::uint64_t matches[kMaxN] = {0, 0, 0, 0};
  std::uint64_t totals[kMaxN] = {0, 0, 0, 0};
  std::uint64_t candidate_length = 0;
  std::uint64_t reference_length = 0;
  for (const SentenceStats& stats : per_sentence) {
    for (int n = 0; n < kMaxN; ++n) {
      matches[n] += stats.ngrams[n].matches;
      totals[n] += stats.ngrams[n].total;
    }
    candidate_length += stats.candidate_length;
    reference_length += stats.reference_length;
  }

  if (candidate_length == 0) return 0.0;

  double log_precision_sum = 0.0;
  for (int n = 0; n < kMaxN; ++n) {
    std::uint64_t m = matches[n];
    std::uint64_t t = totals[n];
    if (smoothing == BleuSmoothing::AddOne && n >= 1) {
      m += 1;
      t += 1;
    }
    if (m == 0 || t == 0) return 0.0;
    log_precision_sum += std::log(static_cast<double>(m) /
                                  static_cast<double>(t));
  }

  const double bp =
      candidate_length > reference_length
          ? 1.0
          : std::exp(1.0 - static_cast<double>(reference_length) /
                               static_cast<double>(candidate_length));
  const double score = bp * std::exp(log_precision_sum / kMaxN) * 100.0;
  return std::clamp(score, 0.0, 100.0);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> curr(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        curr[j] = prev[j - 1] + 1;
      } else {
        curr[j] = std::max(prev[j], curr[j - 1]);
      }
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

double rouge_l_sentence(const Tokens& candidate,
                        const ReferenceSet& references) {
  if (references.empty()) {
    throw EmptyReferenceSetError("reference set is empty");
  }
  if (candidate.empty()) return 0.0;
  double best = 0.0;
  const double beta2 = kRougeBeta * kRougeBeta;
  for (const Tokens& reference : references) {
    if (reference.empty()) continue;
    const auto lcs = static_cast<double>(lcs_length(candidate, reference));
    if (lcs == 0.0) continue;
    const double precision = lcs / static_cast<double>(candidate.size());
    const double recall = lcs / static_cast<double>(reference.size());
    const double f =
        (1.0 + beta2) * precision * recall / (recall + beta2 * precision);
    best = std::max(best, f);
  }
  return best;
}

double rouge_l_corpus(const std::vector<Tokens>& candidates,
                      const std::vector<ReferenceSet>& references) {
  if (candidates.size() != references.size()) {
    throw LengthMismatchError("candidate and reference counts differ");
  }
  std::vector<double> scores(candidates.size(), 0.0);
  parallel_for(candidates.size(), [&](std::size_t i) {
    scores[i] = rouge_l_sentence(candidates[i], references[i]);
  });
  return safe_mean(scores);
}

MeteorAlignment meteor_align(const Tokens& candidate, const Tokens& reference) {
  MeteorAlignment alignment;
  std::vector<bool> cand_used(candidate.size(), false);
  std::vector<bool> ref_used(reference.size(), false);

  while (true) {
    std::size_t best_len = 0;
    std::size_t best_i = 0;
    std::size_t best_j = 0;
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (cand_used[i]) continue;
      for (std::size_t j = 0; j < reference.size(); ++j) {
        if (ref_used[j]) continue;
        std::size_t len = 0;
        while (i + len < candidate.size() && j + len < reference.size() &&
               !cand_used[i + len] && !ref_used[j + len] &&
               candidate[i + len] == reference[j + len]) {
          ++len;
        }
        if (len > best_len) {
          best_len = len;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_len == 0) break;
    for (std::size_t k = 0; k < best_len; ++k) {
      cand_used[best_i + k] = true;
      ref_used[best_j + k] = true;
    }
    alignment.matches += best_len;
    alignment.chunks += 1;
  }
  return alignment;
}

double meteor_lite_sentence(const Tokens& candidate,
                            const ReferenceSet& references) {
  if (references.empty()) {
    throw EmptyReferenceSetError("reference set is empty");
  }
  double best = 0.0;
  for (const Tokens& reference : references) {
    const MeteorAlignment alignment = meteor_align(candidate, reference);
    if (alignment.matches == 0) continue;
    const double m = static_cast<double>(alignment.matches);
    const double precision = m / static_cast<double>(candidate.size());
    const double recall = m / static_cast<double>(reference.size());
    const double fmean =
        10.0 * precision * recall / (recall + 9.0 * precision);
    const double frag = static_cast<double>(alignment.chunks) / m;
    const double penalty = 0.5 * frag * frag * frag;
    best = std::max(best, fmean * (1.0 - penalty));
  }
  return best;
}

double meteor_lite_corpus(const std::vector<Tokens>& candidates,
                          const std::vector<ReferenceSet>& references) {
  if (candidates.size() != references.size()) {
    throw LengthMismatchError("candidate and reference counts differ");
  }
  std::vector<double> scores(candidates.size(), 0.0);
  parallel_for(candidates.size(), [&](std::size_t i) {
    scores[i] = meteor_lite_sentence(candidates[i], references[i]);
  });
  return safe_mean(scores);
}

EvalReport evaluate_dataset(const std::filesystem::path& candidate_file,
                            const std::filesystem::path& reference_file,
                            const EvalOptions& options) {
  static const std::set<std::string> kKnown = {"bleu", "rouge_l",
                                               "meteor_lite"};
  for (const std::string& metric : options.metrics) {
    if (!kKnown.count(metric)) throw UnsupportedMetricError(metric);
  }

  json cand_doc;
  json ref_doc;
  try {
    cand_doc = json::parse(read_file(candidate_file));
    ref_doc = json::parse(read_file(reference_file));
  } catch (const json::exception& ex) {
    throw MalformedInputError(std::string("invalid JSON: ") + ex.what());
  }
  if (!cand_doc.is_array() || !ref_doc.is_array()) {
    throw MalformedInputError("candidate and reference files must be arrays");
  }

  std::map<std::string, std::vector<std::string>> reference_texts;
  for (const json& entry : ref_doc) {
    if (!entry.is_object() || !entry.contains("id") ||
        !entry.contains("references") || !entry.at("references").is_array()) {
      throw MalformedInputError("reference entry must be {id, references}");
    }
    auto& refs = reference_texts[entry.at("id").get<std::string>()];
    for (const json& text : entry.at("references")) {
      refs.push_back(text.get<std::string>());
    }
    if (refs.empty()) {
      throw EmptyReferenceSetError("empty reference list for id \"" +
                                   entry.at("id").get<std::string>() + "\"");
    }
  }

  std::vector<std::string> ids;
  std::vector<Tokens> candidates;
  std::vector<ReferenceSet> references;
  std::vector<std::string> missing;
  std::set<std::string> seen;
  for (const json& entry : cand_doc) {
    if (!entry.is_object() || !entry.contains("id") || !entry.contains("text")) {
      throw MalformedInputError("candidate entry must be {id, text}");
    }
    const std::string id = entry.at("id").get<std::string>();
    seen.insert(id);
    const auto it = reference_texts.find(id);
    if (it == reference_texts.end()) {
      missing.push_back(id);
      continue;
    }
    ids.push_back(id);
    candidates.push_back(
        tokenize(entry.at("text").get<std::string>(), options.language).tokens);
    ReferenceSet refs;
    for (const std::string& text : it->second) {
      refs.push_back(tokenize(text, options.language).tokens);
    }
    references.push_back(std::move(refs));
  }
  for (const auto& [id, refs] : reference_texts) {
    if (!seen.count(id)) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::string joined;
    for (const std::string& id : missing) {
      if (!joined.empty()) joined += ", ";
      joined += id;
    }
    throw IdMismatchError("ids present on only one side: " + joined);
  }
  if (candidates.empty()) {
    throw MalformedInputError("no candidates to evaluate");
  }

  EvalReport report;
  report.candidates = candidates.size();
  report.references_min = references.front().size();
  report.references_max = references.front().size();
  for (const ReferenceSet& refs : references) {
    report.references_min = std::min(report.references_min, refs.size());
    report.references_max = std::max(report.references_max, refs.size());
  }

  if (options.metrics.count("bleu")) {
    report.bleu = bleu_corpus(candidates, references, options.smoothing);
    report.variants["bleu"] = options.smoothing == BleuSmoothing::AddOne
                                  ? "bleu4-multi-ref-addone"
                                  : "bleu4-multi-ref";
  }
  if (options.metrics.count("rouge_l")) {
    report.rouge_l = rouge_l_corpus(candidates, references);
    report.variants["rouge_l"] = "rouge-l-fbeta1.2-maxref";
  }
  if (options.metrics.count("meteor_lite")) {
    report.meteor_lite = meteor_lite_corpus(candidates, references);
    report.variants["meteor_lite"] = kMeteorLiteVariant;
  }

  if (options.per_sentence) {
    std::vector<SentenceScores> rows(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t i) {
      SentenceScores& row = rows[i];
      row.id = ids[i];
      if (options.metrics.count("bleu")) {
        row.bleu = bleu_corpus({candidates[i]}, {references[i]},
                               options.smoothing);
      }
      if (options.metrics.count("rouge_l")) {
        row.rouge_l = rouge_l_sentence(candidates[i], references[i]);
      }
      if (options.metrics.count("meteor_lite")) {
        row.meteor_lite = meteor_lite_sentence(candidates[i], references[i]);
      }
    });
    report.per_sentence = std::move(rows);
  }
  return report;
}

std::string render_eval_json(const EvalReport& report) {
  ordered_json out;
  out["tokenizer"] = report.tokenizer_id;
  ordered_json metrics;
  if (report.bleu) metrics["bleu"] = *report.bleu;
  if (report.rouge_l) {
    metrics["rouge_l"] = {{"beta", kRougeBeta}, {"score", *report.rouge_l}};
  }
  if (report.meteor_lite) metrics["meteor_lite"] = *report.meteor_lite;
  out["metrics"] = std::move(metrics);
  out["variants"] = report.variants;
  out["counts"] = {{"candidates", report.candidates},
                   {"references_min", report.references_min},
                   {"references_max", report.references_max}};
  if (report.per_sentence) {
    ordered_json rows = ordered_json::array();
    for (const SentenceScores& row : *report.per_sentence) {
      ordered_json row_json;
      row_json["id"] = row.id;
      if (row.bleu) row_json["bleu"] = *row.bleu;
      if (row.rouge_l) row_json["rouge_l"] = *row.rouge_l;
      if (row.meteor_lite) row_json["meteor_lite"] = *row.meteor_lite;
      rows.push_back(std::move(row_json));
    }
    out["per_sentence"] = std::move(rows);
  }
  return out.dump(2) + "\n";
}

std::string render_eval_table(const EvalReport& report) {
  std::ostringstream out;
  out << "candidates: " << report.candidates << "  references: "
      << report.references_min;
  if (report.references_max != report.references_min) {
    out << "-" << report.references_max;
  }
  out << " per candidate  tokenizer: " << report.tokenizer_id << "\n";
  const auto line = [&](const char* name, std::optional<double> value,
                        const char* variant) {
    if (!value) return;
    out << name << ": " << *value << "  (" << variant << ")\n";
  };
  line("BLEU", report.bleu,
       report.variants.count("bleu") ? report.variants.at("bleu").c_str() : "");
  line("ROUGE-L", report.rouge_l,
       report.variants.count("rouge_l") ? report.variants.at("rouge_l").c_str()
                                        : "");
  line("METEOR-lite", report.meteor_lite,
       report.variants.count("meteor_lite")
           ? report.variants.at("meteor_lite").c_str()
           : "");
  return out.str();
}

}  // namespace annotator
