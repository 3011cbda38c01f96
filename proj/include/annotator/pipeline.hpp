#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "annotator/backend.hpp"
#include "annotator/corpus.hpp"
#include "annotator/cost.hpp"
#include "annotator/prompt.hpp"

namespace annotator {

struct RunConfig {
  Task task = Task::Captioning;
  LanguageTag target_language{"ko", "Korean"};
  std::string template_ref;  // template id or file path; empty → built-in
  int n_paraphrases = 4;     // captioning only
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path exclusions;  // default: <output>.exclusions.jsonl
  std::optional<std::filesystem::path> mock_script;
  bool resume = false;
  Money price_per_1k_tokens = Money::from_micros(2'000);
  // Overrides the dataset timestamp; otherwise SOURCE_DATE_EPOCH is used
  // when set, mock runs pin the epoch, and live runs record the wall clock.
  std::optional<std::string> created_at;
  BackendConfig backend;
};

RunConfig load_run_config(const std::filesystem::path& path);
void validate_run_config(const RunConfig& config);

// Resolves template_ref: a path loads a template file, an id hits the
// built-in registry (generic ids are re-targeted to the configured
// language), empty picks the generic template for the task.
PromptTemplate resolve_template(const RunConfig& config);

// One record per item, in input order. A record carries n_paraphrases+1
// target captions (translation first) or is excluded with the last error.
std::vector<AnnotatedRecord> annotate_captioning(
    const std::vector<DataItem>& items, const PromptTemplate& t,
    ChatBackend& backend, const BackendConfig& config, Clock& clock,
    const PoolProgress& progress = nullptr);

// One record per item; two target-language pairs each (translated original
// pair, then the translated paraphrase pair).
std::vector<AnnotatedRecord> annotate_tst(const std::vector<DataItem>& items,
                                          const PromptTemplate& t,
                                          ChatBackend& backend,
                                          const BackendConfig& config,
                                          Clock& clock,
                                          const PoolProgress& progress = nullptr);

struct RunSummary {
  std::size_t total_items = 0;
  std::size_t annotated = 0;
  std::size_t excluded = 0;
  TokenUsage usage;
  Money estimated_cost;
  std::filesystem::path output;
  std::filesystem::path exclusions;
};

std::string render_summary_json(const RunSummary& summary);

// Full batch: load corpus, annotate over the worker pool, write dataset +
// exclusion log + run manifest (<output>.manifest.json).
RunSummary run_batch(const RunConfig& config, ChatBackend& backend,
                     Clock& clock, const PoolProgress& progress = nullptr);

// Convenience overloads that build the backend (mock script or HTTP) and a
// system clock from the config.
RunSummary run_batch(const RunConfig& config,
                     const PoolProgress& progress = nullptr);
RunSummary run_batch(const std::filesystem::path& config_file,
                     const PoolProgress& progress = nullptr);

}  // namespace annotator
