#include "annotator/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <utility>

#include "json.hpp"

#include "annotator/errors.hpp"
#include "annotator/io.hpp"
#include "annotator/rng.hpp"
#include "annotator/text.hpp"
#include "annotator/version.hpp"

namespace annotator {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const std::map<std::string, std::string>& language_table() {
  static const std::map<std::string, std::string> table = {
      {"en", "English"},   {"ko", "Korean"},    {"fr", "French"},
      {"lv", "Latvian"},   {"et", "Estonian"},  {"fi", "Finnish"},
      {"vi", "Vietnamese"},{"pl", "Polish"},    {"pt", "Portuguese"},
      {"it", "Italian"},   {"eu", "Basque"},    {"mi", "Maori"},
      {"de", "German"},    {"es", "Spanish"},   {"ja", "Japanese"},
      {"zh", "Chinese"},   {"ru", "Russian"},   {"ar", "Arabic"},
      {"hi", "Hindi"},     {"tr", "Turkish"},   {"nl", "Dutch"},
      {"sv", "Swedish"},
  };
  return table;
}

std::string require_string(const json& value, const char* key,
                           std::size_t index) {
  if (!value.contains(key) || !value.at(key).is_string()) {
    throw MalformedInputError(std::string("missing string field \"") + key +
                                  "\"",
                              index);
  }
  return value.at(key).get<std::string>();
}

Annotation gold_english(std::string text, std::size_t index,
                        const std::string& id) {
  const std::string trimmed = trim_copy(text);
  if (trimmed.empty()) {
    throw MissingGoldError(id);
  }
  if (trimmed.find('\n') != std::string::npos) {
    throw MalformedInputError("gold text for \"" + id +
                                  "\" contains a newline",
                              index);
  }
  return Annotation{trimmed, make_language("en", "English"), gold_provenance()};
}

ordered_json annotation_payload(const Annotation& annotation) {
  ordered_json out;
  out["text"] = annotation.text;
  out["language"] = annotation.language.code;
  return out;
}

ordered_json silver_caption_payload(const SilverCaption& silver) {
  ordered_json out;
  out["text"] = silver.annotation.text;
  out["language"] = silver.annotation.language.code;
  out["generator"] = silver.annotation.provenance.generator.value_or("");
  out["prompt_id"] = silver.annotation.provenance.prompt_id.value_or("");
  if (silver.english_intermediate) {
    out["english_intermediate"] = *silver.english_intermediate;
  }
  return out;
}

ordered_json silver_style_payload(const Annotation& annotation,
                                  const char* style, int pair) {
  ordered_json out;
  out["text"] = annotation.text;
  out["language"] = annotation.language.code;
  out["generator"] = annotation.provenance.generator.value_or("");
  out["prompt_id"] = annotation.provenance.prompt_id.value_or("");
  out["style"] = style;
  out["pair"] = pair;
  return out;
}

LanguageTag language_for_code(const std::string& code,
                              const DatasetMeta& meta) {
  if (code == meta.target_language.code) return meta.target_language;
  if (code == "en") return make_language("en", "English");
  const auto& table = language_table();
  const auto it = table.find(code);
  return make_language(code, it != table.end() ? it->second : code);
}

AnnotationProvenance silver_from_entry(const json& entry) {
  return silver_provenance(entry.value("generator", ""),
                           entry.value("prompt_id", ""));
}

}  // namespace

std::string task_name(Task task) {
  return task == Task::Captioning ? "captioning" : "tst";
}

Task task_from_name(const std::string& name) {
  if (name == "captioning") return Task::Captioning;
  if (name == "tst") return Task::StyleTransfer;
  throw ConfigError("unknown task \"" + name + "\" (expected captioning|tst)");
}

LanguageTag make_language(std::string code, std::string display_name) {
  if (code.empty()) throw ConfigError("language code must not be empty");
  for (const char c : code) {
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '-')) {
      throw ConfigError("language code \"" + code +
                        "\" must be lowercase ASCII");
    }
  }
  if (display_name.empty()) {
    throw ConfigError("language display name must not be empty");
  }
  return LanguageTag{std::move(code), std::move(display_name)};
}

LanguageTag language_from_arg(const std::string& arg) {
  const auto colon = arg.find(':');
  if (colon != std::string::npos) {
    return make_language(arg.substr(0, colon), arg.substr(colon + 1));
  }
  const auto& table = language_table();
  const auto it = table.find(arg);
  if (it == table.end()) {
    throw ConfigError("unknown language code \"" + arg +
                      "\"; pass code:DisplayName, e.g. lv:Latvian");
  }
  return make_language(arg, it->second);
}

AnnotationProvenance gold_provenance() {
  return AnnotationProvenance{ProvenanceKind::Gold, std::nullopt, std::nullopt};
}

AnnotationProvenance silver_provenance(std::string generator,
                                       std::string prompt_id) {
  return AnnotationProvenance{ProvenanceKind::Silver, std::move(generator),
                              std::move(prompt_id)};
}

Annotation make_annotation(std::string text, LanguageTag language,
                           AnnotationProvenance provenance) {
  if (text.empty()) {
    throw InvariantViolationError("", "annotation text is empty");
  }
  if (trim(text) != text) {
    throw InvariantViolationError("", "annotation text has edge whitespace");
  }
  if (text.find('\n') != std::string::npos) {
    throw InvariantViolationError("", "annotation text contains a newline");
  }
  const bool is_gold = provenance.kind == ProvenanceKind::Gold;
  if (is_gold && (provenance.generator || provenance.prompt_id)) {
    throw InvariantViolationError("", "gold annotation carries generator data");
  }
  if (!is_gold && (!provenance.generator || !provenance.prompt_id)) {
    throw InvariantViolationError(
        "", "silver annotation lacks generator or prompt_id");
  }
  return Annotation{std::move(text), std::move(language), std::move(provenance)};
}

std::vector<DataItem> load_corpus(const std::filesystem::path& path,
                                  Task task) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& ex) {
    throw MalformedInputError(std::string("invalid JSON: ") + ex.what());
  }
  if (!doc.is_array()) {
    throw MalformedInputError("top-level value must be an array");
  }

  std::vector<DataItem> items;
  items.reserve(doc.size());
  std::set<std::string> seen;
  for (std::size_t index = 0; index < doc.size(); ++index) {
    const json& entry = doc[index];
    if (!entry.is_object()) {
      throw MalformedInputError("entry is not an object", index);
    }
    DataItem item;
    item.id = require_string(entry, "id", index);
    if (item.id.empty()) {
      throw MalformedInputError("empty id", index);
    }
    if (!seen.insert(item.id).second) {
      throw DuplicateIdError(item.id);
    }
    if (task == Task::Captioning) {
      if (entry.contains("content_ref")) {
        item.content_ref = require_string(entry, "content_ref", index);
      }
      if (!entry.contains("gold_caption")) {
        throw MissingGoldError(item.id);
      }
      item.gold = gold_english(require_string(entry, "gold_caption", index),
                               index, item.id);
    } else {
      if (!entry.contains("informal") || !entry.contains("formal")) {
        throw MissingGoldError(item.id);
      }
      StylePair pair;
      pair.informal = gold_english(require_string(entry, "informal", index),
                                   index, item.id);
      pair.formal = gold_english(require_string(entry, "formal", index),
                                 index, item.id);
      item.gold = std::move(pair);
    }
    items.push_back(std::move(item));
  }
  return items;
}

void check_record_invariants(const AnnotatedRecord& record) {
  const std::string& id = record.item.id;
  if (record.excluded) {
    if (record.silver_count() != 0) {
      throw InvariantViolationError(id, "excluded record has silver data");
    }
    if (!record.exclusion_reason) {
      throw InvariantViolationError(id, "excluded record lacks a reason");
    }
    return;
  }
  if (record.exclusion_reason) {
    throw InvariantViolationError(id, "non-excluded record has a reason");
  }
  if (record.silver_count() == 0) {
    throw InvariantViolationError(id, "non-excluded record has no silver data");
  }
  if (record.item.task() == Task::Captioning) {
    if (!record.style_pairs.empty()) {
      throw InvariantViolationError(id, "captioning record has style pairs");
    }
    const Annotation& gold = record.item.gold_caption();
    if (gold.language.code != "en" ||
        gold.provenance.kind != ProvenanceKind::Gold) {
      throw InvariantViolationError(id, "gold caption must be English gold");
    }
    for (const SilverCaption& silver : record.captions) {
      if (silver.annotation.provenance.kind != ProvenanceKind::Silver) {
        throw InvariantViolationError(id, "silver caption lacks provenance");
      }
    }
  } else {
    if (!record.captions.empty()) {
      throw InvariantViolationError(id, "style-transfer record has captions");
    }
    const StylePair& gold = record.item.gold_pair();
    for (const Annotation* annotation : {&gold.informal, &gold.formal}) {
      if (annotation->language.code != "en" ||
          annotation->provenance.kind != ProvenanceKind::Gold) {
        throw InvariantViolationError(id, "gold pair must be English gold");
      }
    }
    for (const StylePair& pair : record.style_pairs) {
      if (pair.informal.language != pair.formal.language) {
        throw InvariantViolationError(id,
                                      "style pair mixes two languages");
      }
      if (pair.informal.provenance.kind != ProvenanceKind::Silver ||
          pair.formal.provenance.kind != ProvenanceKind::Silver) {
        throw InvariantViolationError(id, "silver pair lacks provenance");
      }
    }
  }
}

void save_dataset(const std::vector<AnnotatedRecord>& records,
                  const std::filesystem::path& dataset_path,
                  const std::filesystem::path& exclusion_log_path,
                  const DatasetMeta& meta) {
  for (const AnnotatedRecord& record : records) {
    check_record_invariants(record);
  }

  std::vector<const AnnotatedRecord*> sorted;
  sorted.reserve(records.size());
  for (const AnnotatedRecord& record : records) sorted.push_back(&record);
  std::sort(sorted.begin(), sorted.end(),
            [](const AnnotatedRecord* a, const AnnotatedRecord* b) {
              return a->item.id < b->item.id;
            });

  ordered_json dataset = ordered_json::array();
  std::string exclusions;
  for (const AnnotatedRecord* record : sorted) {
    if (record->excluded) {
      ordered_json line;
      line["id"] = record->item.id;
      line["attempts"] = record->attempts;
      line["last_error"] = *record->exclusion_reason;
      exclusions += line.dump();
      exclusions += '\n';
      continue;
    }
    ordered_json out;
    out["id"] = record->item.id;
    if (record->item.content_ref) {
      out["content_ref"] = *record->item.content_ref;
    }
    if (record->item.task() == Task::Captioning) {
      out["gold"] = annotation_payload(record->item.gold_caption());
      ordered_json silver = ordered_json::array();
      for (const SilverCaption& caption : record->captions) {
        silver.push_back(silver_caption_payload(caption));
      }
      out["silver"] = std::move(silver);
    } else {
      const StylePair& gold = record->item.gold_pair();
      out["gold"] = {{"informal", annotation_payload(gold.informal)},
                     {"formal", annotation_payload(gold.formal)}};
      ordered_json silver = ordered_json::array();
      int pair_index = 1;
      for (const StylePair& pair : record->style_pairs) {
        silver.push_back(
            silver_style_payload(pair.informal, "informal", pair_index));
        silver.push_back(
            silver_style_payload(pair.formal, "formal", pair_index));
        ++pair_index;
      }
      out["silver"] = std::move(silver);
    }
    ordered_json meta_json;
    meta_json["task"] = task_name(meta.task);
    meta_json["target_language"] = {
        {"code", meta.target_language.code},
        {"display_name", meta.target_language.display_name}};
    meta_json["created_at"] = meta.created_at;
    meta_json["tool_version"] = meta.tool_version;
    meta_json["attempts"] = record->attempts;
    meta_json["usage"] = {{"prompt_tokens", record->usage.prompt_tokens},
                          {"completion_tokens", record->usage.completion_tokens},
                          {"estimated", record->usage.estimated}};
    out["meta"] = std::move(meta_json);
    dataset.push_back(std::move(out));
  }

  atomic_write_file(dataset_path, dataset.dump(2) + "\n");
  atomic_write_file(exclusion_log_path, exclusions);
}

LoadedDataset load_dataset(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& ex) {
    throw MalformedInputError(std::string("invalid JSON: ") + ex.what());
  }
  if (!doc.is_array()) {
    throw MalformedInputError("top-level value must be an array");
  }

  LoadedDataset loaded;
  loaded.meta.tool_version = kToolVersion;
  loaded.meta.target_language = make_language("en", "English");
  std::set<std::string> seen;

  for (std::size_t index = 0; index < doc.size(); ++index) {
    const json& entry = doc[index];
    if (!entry.is_object() || !entry.contains("gold") ||
        !entry.contains("silver") || !entry.contains("meta")) {
      throw MalformedInputError("entry is not a dataset record", index);
    }
    const json& meta_json = entry.at("meta");
    DatasetMeta meta;
    meta.task = task_from_name(meta_json.value("task", ""));
    const json& lang = meta_json.at("target_language");
    meta.target_language =
        make_language(lang.value("code", ""), lang.value("display_name", ""));
    meta.created_at = meta_json.value("created_at", "");
    meta.tool_version = meta_json.value("tool_version", "");
    if (index == 0) loaded.meta = meta;

    AnnotatedRecord record;
    record.item.id = require_string(entry, "id", index);
    if (!seen.insert(record.item.id).second) {
      throw DuplicateIdError(record.item.id);
    }
    if (entry.contains("content_ref")) {
      record.item.content_ref = require_string(entry, "content_ref", index);
    }
    record.attempts = meta_json.value("attempts", 0);
    if (meta_json.contains("usage")) {
      const json& usage = meta_json.at("usage");
      record.usage.prompt_tokens = usage.value("prompt_tokens", 0ULL);
      record.usage.completion_tokens = usage.value("completion_tokens", 0ULL);
      record.usage.estimated = usage.value("estimated", false);
    }

    const json& gold = entry.at("gold");
    if (meta.task == Task::Captioning) {
      record.item.gold = make_annotation(gold.value("text", ""),
                                         make_language("en", "English"),
                                         gold_provenance());
      for (const json& silver : entry.at("silver")) {
        SilverCaption caption;
        caption.annotation = make_annotation(
            silver.value("text", ""),
            language_for_code(silver.value("language", ""), meta),
            silver_from_entry(silver));
        if (silver.contains("english_intermediate")) {
          caption.english_intermediate =
              silver.at("english_intermediate").get<std::string>();
        }
        record.captions.push_back(std::move(caption));
      }
    } else {
      StylePair gold_pair;
      gold_pair.informal = make_annotation(
          gold.at("informal").value("text", ""),
          make_language("en", "English"), gold_provenance());
      gold_pair.formal = make_annotation(gold.at("formal").value("text", ""),
                                         make_language("en", "English"),
                                         gold_provenance());
      record.item.gold = std::move(gold_pair);

      std::map<int, std::pair<std::optional<Annotation>,
                              std::optional<Annotation>>>
          pairs;
      for (const json& silver : entry.at("silver")) {
        Annotation annotation = make_annotation(
            silver.value("text", ""),
            language_for_code(silver.value("language", ""), meta),
            silver_from_entry(silver));
        const int pair_index = silver.value("pair", 1);
        const std::string style = silver.value("style", "");
        if (style == "informal") {
          pairs[pair_index].first = std::move(annotation);
        } else if (style == "formal") {
          pairs[pair_index].second = std::move(annotation);
        } else {
          throw MalformedInputError("silver entry lacks a style tag", index);
        }
      }
      for (auto& [pair_index, members] : pairs) {
        if (!members.first || !members.second) {
          throw MalformedInputError(
              "style pair " + std::to_string(pair_index) + " is incomplete",
              index);
        }
        record.style_pairs.push_back(
            StylePair{std::move(*members.first), std::move(*members.second)});
      }
    }
    check_record_invariants(record);
    loaded.records.push_back(std::move(record));
  }
  return loaded;
}

SplitSpec parse_split_spec(const std::string& ratios, std::uint64_t seed) {
  std::vector<Ratio> parsed;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= ratios.size(); ++i) {
    if (i == ratios.size() || ratios[i] == ':') {
      const std::string part = ratios.substr(start, i - start);
      start = i + 1;
      if (part.empty()) throw ConfigError("empty ratio component");
      std::uint64_t num = 0;
      std::uint64_t den = 1;
      bool seen_dot = false;
      for (const char c : part) {
        if (c == '.') {
          if (seen_dot) throw ConfigError("bad ratio \"" + part + "\"");
          seen_dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
          num = num * 10 + static_cast<std::uint64_t>(c - '0');
          if (seen_dot) den *= 10;
          if (den > 1000000000ULL || num > (1ULL << 53)) {
            throw ConfigError("ratio \"" + part + "\" has too many digits");
          }
        } else {
          throw ConfigError("bad ratio \"" + part + "\"");
        }
      }
      parsed.push_back(Ratio{num, den});
    }
  }
  if (parsed.size() != 3) {
    throw ConfigError("expected three ratios, e.g. 8:1:1");
  }
  if (parsed[0].num + parsed[1].num + parsed[2].num == 0) {
    throw ConfigError("ratios must not all be zero");
  }
  return SplitSpec{{parsed[0], parsed[1], parsed[2]}, seed};
}

std::array<std::vector<std::size_t>, 3> split_indices(std::size_t n,
                                                      const SplitSpec& spec) {
  using u128 = unsigned __int128;
  // Normalise: with a common denominator D = den0·den1·den2, ratio i
  // becomes num_i·(D/den_i) / total. floor(n·r_i) then needs only
  // integer arithmetic.
  const u128 d0 = spec.ratios[0].den;
  const u128 d1 = spec.ratios[1].den;
  const u128 d2 = spec.ratios[2].den;
  const u128 scaled0 = static_cast<u128>(spec.ratios[0].num) * d1 * d2;
  const u128 scaled1 = static_cast<u128>(spec.ratios[1].num) * d0 * d2;
  const u128 scaled2 = static_cast<u128>(spec.ratios[2].num) * d0 * d1;
  const u128 total = scaled0 + scaled1 + scaled2;
  if (total == 0) throw ConfigError("ratios must not all be zero");

  const std::size_t train =
      static_cast<std::size_t>(static_cast<u128>(n) * scaled0 / total);
  const std::size_t validation =
      static_cast<std::size_t>(static_cast<u128>(n) * scaled1 / total);
  const std::size_t test = n - train - validation;

  const std::vector<std::size_t> order = shuffled_indices(n, spec.seed);
  std::array<std::vector<std::size_t>, 3> out;
  out[0].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train));
  out[1].assign(order.begin() + static_cast<std::ptrdiff_t>(train),
                order.begin() + static_cast<std::ptrdiff_t>(train + validation));
  out[2].assign(order.begin() + static_cast<std::ptrdiff_t>(train + validation),
                order.end());
  (void)test;
  return out;
}

SplitResult split_dataset(const std::vector<AnnotatedRecord>& records,
                          const SplitSpec& spec) {
  std::vector<const AnnotatedRecord*> live;
  live.reserve(records.size());
  for (const AnnotatedRecord& record : records) {
    if (!record.excluded) live.push_back(&record);
  }
  if (live.empty()) throw EmptyCorpusError();

  const auto parts = split_indices(live.size(), spec);
  SplitResult result;
  for (const std::size_t i : parts[0]) result.train.push_back(*live[i]);
  for (const std::size_t i : parts[1]) result.validation.push_back(*live[i]);
  for (const std::size_t i : parts[2]) result.test.push_back(*live[i]);
  return result;
}

}  // namespace annotator
