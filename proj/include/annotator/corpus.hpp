#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace annotator {

enum class Task { Captioning, StyleTransfer };

std::string task_name(Task task);
Task task_from_name(const std::string& name);

struct LanguageTag {
  std::string code;          // BCP-47 primary subtag, e.g. "ko"
  std::string display_name;  // name used inside prompts, e.g. "Korean"

  bool operator==(const LanguageTag&) const = default;
};

// Validates: non-empty lowercase ASCII code, non-empty display name.
LanguageTag make_language(std::string code, std::string display_name);
// Looks the display name up from a built-in table; accepts "code:Display"
// to name languages outside it.
LanguageTag language_from_arg(const std::string& arg);

enum class ProvenanceKind { Gold, Silver };

struct AnnotationProvenance {
  ProvenanceKind kind = ProvenanceKind::Gold;
  std::optional<std::string> generator;  // model id, silver only
  std::optional<std::string> prompt_id;  // template id, silver only

  bool operator==(const AnnotationProvenance&) const = default;
};

AnnotationProvenance gold_provenance();
AnnotationProvenance silver_provenance(std::string generator,
                                       std::string prompt_id);

struct Annotation {
  std::string text;
  LanguageTag language;
  AnnotationProvenance provenance;

  bool operator==(const Annotation&) const = default;
};

// Validates the Annotation invariants: non-empty, no edge whitespace, no
// embedded newline, and provenance fields consistent with the kind.
Annotation make_annotation(std::string text, LanguageTag language,
                           AnnotationProvenance provenance);

struct StylePair {
  Annotation informal;
  Annotation formal;

  bool operator==(const StylePair&) const = default;
};

struct DataItem {
  std::string id;
  std::optional<std::string> content_ref;   // captioning only, opaque
  std::variant<Annotation, StylePair> gold; // Annotation ⇒ captioning

  bool operator==(const DataItem&) const = default;

  Task task() const {
    return std::holds_alternative<Annotation>(gold) ? Task::Captioning
                                                    : Task::StyleTransfer;
  }
  const Annotation& gold_caption() const { return std::get<Annotation>(gold); }
  const StylePair& gold_pair() const { return std::get<StylePair>(gold); }
};

struct SilverCaption {
  Annotation annotation;
  // English text the target caption was generated alongside; absent for the
  // direct translation of the gold caption.
  std::optional<std::string> english_intermediate;

  bool operator==(const SilverCaption&) const = default;
};

struct TokenUsage {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  bool estimated = false;  // true when any component was estimated locally

  std::uint64_t total() const { return prompt_tokens + completion_tokens; }
  void add(const TokenUsage& other) {
    prompt_tokens += other.prompt_tokens;
    completion_tokens += other.completion_tokens;
    estimated = estimated || other.estimated;
  }
  bool operator==(const TokenUsage&) const = default;
};

struct AnnotatedRecord {
  DataItem item;
  std::vector<SilverCaption> captions;   // captioning silver, translation first
  std::vector<StylePair> style_pairs;    // style-transfer silver
  bool excluded = false;
  std::optional<std::string> exclusion_reason;
  int attempts = 0;
  TokenUsage usage;

  bool operator==(const AnnotatedRecord&) const = default;

  std::size_t silver_count() const {
    return captions.size() + style_pairs.size();
  }
};

struct DatasetMeta {
  Task task = Task::Captioning;
  LanguageTag target_language;
  std::string created_at;    // RFC 3339 UTC
  std::string tool_version;
};

// ---- corpus IO ----

std::vector<DataItem> load_corpus(const std::filesystem::path& path, Task task);

struct LoadedDataset {
  std::vector<AnnotatedRecord> records;
  DatasetMeta meta;
};

LoadedDataset load_dataset(const std::filesystem::path& path);

// Writes non-excluded records (sorted by id) to `dataset_path` and one
// JSON line per excluded record to `exclusion_log_path`.
void save_dataset(const std::vector<AnnotatedRecord>& records,
                  const std::filesystem::path& dataset_path,
                  const std::filesystem::path& exclusion_log_path,
                  const DatasetMeta& meta);

// Throws InvariantViolationError naming the first offending record.
void check_record_invariants(const AnnotatedRecord& record);

// ---- splits ----

struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
};

struct SplitSpec {
  std::array<Ratio, 3> ratios;  // train, validation, test
  std::uint64_t seed = 0;
};

// Parses "8:1:1" or "0.70:0.24:0.06" (integers or decimals, exact).
SplitSpec parse_split_spec(const std::string& ratios, std::uint64_t seed);

// Sizes are floor(n·r_train) and floor(n·r_val) after normalising the
// ratios to sum to one; every remainder row lands in test. The shuffle is
// seeded Fisher-Yates (see rng.hpp), so identical (items, seed, ratios)
// give identical partitions everywhere.
std::array<std::vector<std::size_t>, 3> split_indices(std::size_t n,
                                                      const SplitSpec& spec);

struct SplitResult {
  std::vector<AnnotatedRecord> train;
  std::vector<AnnotatedRecord> validation;
  std::vector<AnnotatedRecord> test;
};

// Excluded records are dropped before partitioning; they never reach a split.
SplitResult split_dataset(const std::vector<AnnotatedRecord>& records,
                          const SplitSpec& spec);

}  // namespace annotator
