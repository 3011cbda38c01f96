#include "annotator/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <set>
#include <unordered_map>

#include "json.hpp"

#include "annotator/errors.hpp"
#include "annotator/io.hpp"
#include "annotator/parser.hpp"
#include "annotator/text.hpp"
#include "annotator/version.hpp"

namespace annotator {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_utc(std::time_t when) {
  std::tm tm_utc{};
  gmtime_r(&when, &tm_utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buffer;
}

std::string resolve_created_at(const RunConfig& config) {
  if (config.created_at) return *config.created_at;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    return format_utc(static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10)));
  }
  if (config.mock_script) {
    return format_utc(0);  // offline runs stay byte-reproducible
  }
  return format_utc(std::time(nullptr));
}

ordered_json config_json(const RunConfig& config) {
  ordered_json out;
  out["task"] = task_name(config.task);
  out["target_language"] = {{"code", config.target_language.code},
                            {"display_name", config.target_language.display_name}};
  out["template"] = config.template_ref;
  out["n_paraphrases"] = config.n_paraphrases;
  out["input"] = config.input.string();
  out["output"] = config.output.string();
  out["exclusions"] = config.exclusions.string();
  if (config.mock_script) out["mock"] = config.mock_script->string();
  out["resume"] = config.resume;
  out["price_per_1k_tokens"] = config.price_per_1k_tokens.str();
  out["backend"] = {
      {"api_base_url", config.backend.api_base_url},
      {"model_id", config.backend.model_id},
      {"api_key_env", config.backend.api_key_env},
      {"temperature", config.backend.temperature},
      {"max_output_tokens", config.backend.max_output_tokens},
      {"request_timeout_ms", config.backend.request_timeout.count()},
      {"patience", config.backend.patience},
      {"max_concurrency", config.backend.max_concurrency},
      {"retry_backoff_ms", config.backend.retry_backoff_base.count()},
  };
  if (config.backend.requests_per_minute) {
    out["backend"]["requests_per_minute"] = *config.backend.requests_per_minute;
  }
  return out;
}

AnnotatedRecord excluded_record(const DataItem& item,
                                const CompletionOutcome& outcome) {
  AnnotatedRecord record;
  record.item = item;
  record.excluded = true;
  record.exclusion_reason = outcome.exclusion->last_error;
  record.attempts = outcome.attempts;
  record.usage = outcome.usage;
  return record;
}

std::unordered_map<std::string, const CompletionOutcome*> outcomes_by_id(
    const std::vector<PoolResult>& results) {
  std::unordered_map<std::string, const CompletionOutcome*> map;
  map.reserve(results.size());
  for (const PoolResult& result : results) {
    map.emplace(result.id, &result.outcome);
  }
  return map;
}

}  // namespace

void validate_run_config(const RunConfig& config) {
  make_language(config.target_language.code,
                config.target_language.display_name);
  if (config.input.empty()) throw ConfigError("input path is required");
  if (config.output.empty()) throw ConfigError("output path is required");
  if (config.n_paraphrases < 0) {
    throw ConfigError("n_paraphrases must be non-negative");
  }
  validate_backend_config(config.backend);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("invalid run config: ") + ex.what());
  }
  RunConfig config;
  try {
    config.task = task_from_name(doc.at("task").get<std::string>());
    if (doc.at("target_language").is_string()) {
      config.target_language =
          language_from_arg(doc.at("target_language").get<std::string>());
    } else {
      const json& lang = doc.at("target_language");
      config.target_language =
          make_language(lang.at("code").get<std::string>(),
                        lang.at("display_name").get<std::string>());
    }
    config.template_ref = doc.value("template", "");
    config.n_paraphrases =
        doc.value("n_paraphrases", config.task == Task::Captioning ? 4 : 1);
    config.input = doc.at("input").get<std::string>();
    config.output = doc.at("output").get<std::string>();
    if (doc.contains("exclusions")) {
      config.exclusions = doc.at("exclusions").get<std::string>();
    }
    if (doc.contains("mock")) {
      config.mock_script = doc.at("mock").get<std::string>();
    }
    config.resume = doc.value("resume", false);
    if (doc.contains("price_per_1k_tokens")) {
      config.price_per_1k_tokens =
          Money::parse(doc.at("price_per_1k_tokens").get<std::string>());
    }
    if (doc.contains("created_at")) {
      config.created_at = doc.at("created_at").get<std::string>();
    }
    if (doc.contains("backend")) {
      const json& backend = doc.at("backend");
      config.backend.api_base_url =
          backend.value("api_base_url", config.backend.api_base_url);
      config.backend.model_id =
          backend.value("model_id", config.backend.model_id);
      config.backend.api_key_env =
          backend.value("api_key_env", config.backend.api_key_env);
      config.backend.temperature =
          backend.value("temperature", config.backend.temperature);
      config.backend.max_output_tokens =
          backend.value("max_output_tokens", config.backend.max_output_tokens);
      config.backend.request_timeout =
          Duration{backend.value("request_timeout_ms",
                                 config.backend.request_timeout.count())};
      config.backend.patience =
          backend.value("patience", config.backend.patience);
      config.backend.max_concurrency =
          backend.value("max_concurrency", config.backend.max_concurrency);
      if (backend.contains("requests_per_minute")) {
        config.backend.requests_per_minute =
            backend.at("requests_per_minute").get<std::uint32_t>();
      }
      config.backend.retry_backoff_base = Duration{backend.value(
          "retry_backoff_ms", config.backend.retry_backoff_base.count())};
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("run config field error: ") + ex.what());
  }
  if (config.exclusions.empty()) {
    config.exclusions = config.output;
    config.exclusions += ".exclusions.jsonl";
  }
  validate_run_config(config);
  return config;
}

PromptTemplate resolve_template(const RunConfig& config) {
  const std::string& ref = config.template_ref;
  const auto looks_like_path = [&] {
    return ref.find('/') != std::string::npos ||
           ref.find(".json") != std::string::npos ||
           std::filesystem::exists(ref);
  };

  PromptTemplate t;
  if (ref.empty() || ref == "captioning" || ref == "tst") {
    // Generic built-ins are re-targeted to the configured language.
    if (config.task == Task::Captioning) {
      t = builtin_captioning_template(config.target_language,
                                      config.n_paraphrases);
    } else {
      t = builtin_tst_template(config.target_language);
    }
    if (!ref.empty() && task_from_name(ref) != config.task) {
      throw ConfigError("template \"" + ref + "\" does not match the task");
    }
  } else if (looks_like_path()) {
    t = load_template_file(ref);
  } else {
    const TemplateRegistry registry = TemplateRegistry::with_builtins();
    t = registry.get(ref);
  }

  if (t.task != config.task) {
    throw ConfigError("template \"" + t.id + "\" targets task " +
                      task_name(t.task) + ", run config says " +
                      task_name(config.task));
  }
  if (t.target_language.code != config.target_language.code) {
    throw ConfigError("template \"" + t.id + "\" targets language \"" +
                      t.target_language.code + "\", run config says \"" +
                      config.target_language.code + "\"");
  }
  validate_template(t);
  return t;
}

std::vector<AnnotatedRecord> annotate_captioning(
    const std::vector<DataItem>& items, const PromptTemplate& t,
    ChatBackend& backend, const BackendConfig& config, Clock& clock,
    const PoolProgress& progress) {
  if (t.task != Task::Captioning) {
    throw TaskMismatchError("annotate_captioning needs a captioning template");
  }
  std::unordered_map<std::string, const DataItem*> by_id;
  std::vector<PoolJob> jobs;
  jobs.reserve(items.size());
  for (const DataItem& item : items) {
    by_id.emplace(item.id, &item);
    jobs.push_back(PoolJob{item.id, build_captioning_prompt(t, item.gold_caption())});
  }

  const int n = t.n_paraphrases;
  const PoolValidator validate = [&](const std::string& raw,
                                     const PoolJob& job) {
    const DataItem& item = *by_id.at(job.id);
    const auto parsed = validate_captioning(raw, n, item.gold_caption().text);
    if (!parsed.ok()) return std::optional<std::string>(parsed.error->message());
    return std::optional<std::string>{};
  };

  const std::vector<PoolResult> results =
      run_pool(backend, jobs, config, validate, clock, nullptr, progress);
  const auto outcomes = outcomes_by_id(results);

  std::vector<AnnotatedRecord> records;
  records.reserve(items.size());
  for (const DataItem& item : items) {
    const CompletionOutcome& outcome = *outcomes.at(item.id);
    if (!outcome.ok()) {
      records.push_back(excluded_record(item, outcome));
      continue;
    }
    const auto parsed = validate_captioning(outcome.exchange->response_text, n,
                                            item.gold_caption().text);
    AnnotatedRecord record;
    record.item = item;
    record.attempts = outcome.attempts;
    record.usage = outcome.usage;
    const auto provenance = [&] {
      return silver_provenance(config.model_id, t.id);
    };
    record.captions.push_back(SilverCaption{
        make_annotation(parsed.value->translation, t.target_language,
                        provenance()),
        std::nullopt});
    for (const ParaphrasePair& pair : parsed.value->paraphrases) {
      record.captions.push_back(SilverCaption{
          make_annotation(pair.target, t.target_language, provenance()),
          pair.english});
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<AnnotatedRecord> annotate_tst(const std::vector<DataItem>& items,
                                          const PromptTemplate& t,
                                          ChatBackend& backend,
                                          const BackendConfig& config,
                                          Clock& clock,
                                          const PoolProgress& progress) {
  if (t.task != Task::StyleTransfer) {
    throw TaskMismatchError("annotate_tst needs a style-transfer template");
  }
  std::vector<PoolJob> jobs;
  jobs.reserve(items.size());
  for (const DataItem& item : items) {
    jobs.push_back(PoolJob{item.id, build_tst_prompt(t, item.gold_pair())});
  }

  const std::string language = t.target_language.display_name;
  const PoolValidator validate = [&](const std::string& raw, const PoolJob&) {
    const auto parsed = parse_tst(raw, language);
    if (!parsed.ok()) return std::optional<std::string>(parsed.error->message());
    return std::optional<std::string>{};
  };

  const std::vector<PoolResult> results =
      run_pool(backend, jobs, config, validate, clock, nullptr, progress);
  const auto outcomes = outcomes_by_id(results);

  std::vector<AnnotatedRecord> records;
  records.reserve(items.size());
  for (const DataItem& item : items) {
    const CompletionOutcome& outcome = *outcomes.at(item.id);
    if (!outcome.ok()) {
      records.push_back(excluded_record(item, outcome));
      continue;
    }
    const auto parsed = parse_tst(outcome.exchange->response_text, language);
    AnnotatedRecord record;
    record.item = item;
    record.attempts = outcome.attempts;
    record.usage = outcome.usage;
    const auto annotate = [&](const std::string& text) {
      return make_annotation(text, t.target_language,
                             silver_provenance(config.model_id, t.id));
    };
    // Translated original pair, then the translated paraphrase pair.
    record.style_pairs.push_back(
        StylePair{annotate(parsed.value->translation_informal_1),
                  annotate(parsed.value->translation_formal_1)});
    record.style_pairs.push_back(
        StylePair{annotate(parsed.value->translation_informal_2),
                  annotate(parsed.value->translation_formal_2)});
    records.push_back(std::move(record));
  }
  return records;
}

std::string render_summary_json(const RunSummary& summary) {
  ordered_json out;
  out["total_items"] = summary.total_items;
  out["annotated"] = summary.annotated;
  out["excluded"] = summary.excluded;
  out["usage"] = {{"prompt_tokens", summary.usage.prompt_tokens},
                  {"completion_tokens", summary.usage.completion_tokens},
                  {"total_tokens", summary.usage.total()},
                  {"estimated", summary.usage.estimated}};
  out["estimated_cost"] = summary.estimated_cost.str();
  out["output"] = summary.output.string();
  out["exclusions"] = summary.exclusions.string();
  return out.dump();
}

RunSummary run_batch(const RunConfig& config, ChatBackend& backend,
                     Clock& clock, const PoolProgress& progress) {
  validate_run_config(config);
  const PromptTemplate t = resolve_template(config);
  const std::string started_at = format_utc(std::time(nullptr));

  std::vector<DataItem> items = load_corpus(config.input, config.task);

  std::vector<AnnotatedRecord> kept;
  if (config.resume) {
    if (!std::filesystem::exists(config.output) ||
        !std::filesystem::exists(config.exclusions)) {
      throw ConfigError("--resume needs an existing dataset and exclusion log");
    }
    kept = load_dataset(config.output).records;
    std::set<std::string> done;
    for (const AnnotatedRecord& record : kept) done.insert(record.item.id);
    std::set<std::string> failed;
    for (const std::string& line : split_lines(read_file(config.exclusions))) {
      if (trim(line).empty()) continue;
      failed.insert(json::parse(line).at("id").get<std::string>());
    }
    // Retry previously excluded items plus anything the corpus gained since;
    // completed records are never re-billed.
    std::vector<DataItem> todo;
    for (DataItem& item : items) {
      if (!done.count(item.id) || failed.count(item.id)) {
        todo.push_back(std::move(item));
      }
    }
    items = std::move(todo);
  }

  std::vector<AnnotatedRecord> fresh;
  if (config.task == Task::Captioning) {
    fresh = annotate_captioning(items, t, backend, config.backend, clock,
                                progress);
  } else {
    fresh = annotate_tst(items, t, backend, config.backend, clock, progress);
  }

  std::vector<AnnotatedRecord> records = std::move(kept);
  for (AnnotatedRecord& record : fresh) records.push_back(std::move(record));

  DatasetMeta meta;
  meta.task = config.task;
  meta.target_language = t.target_language;
  meta.created_at = resolve_created_at(config);
  meta.tool_version = kToolVersion;
  save_dataset(records, config.output, config.exclusions, meta);

  RunSummary summary;
  summary.total_items = records.size();
  summary.output = config.output;
  summary.exclusions = config.exclusions;
  for (const AnnotatedRecord& record : records) {
    if (record.excluded) {
      ++summary.excluded;
    } else {
      ++summary.annotated;
    }
    summary.usage.add(record.usage);
  }
  summary.estimated_cost = config.price_per_1k_tokens.per_thousand(
      static_cast<std::int64_t>(summary.usage.total()));

  ordered_json manifest;
  manifest["tool"] = kToolName;
  manifest["tool_version"] = kToolVersion;
  const ordered_json config_doc = config_json(config);
  char hash_hex[17];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_doc.dump())));
  manifest["config_hash"] = hash_hex;
  manifest["config"] = config_doc;
  manifest["model_id"] = config.backend.model_id;
  manifest["template_id"] = t.id;
  manifest["started_at"] = started_at;
  manifest["finished_at"] = format_utc(std::time(nullptr));
  manifest["total_items"] = summary.total_items;
  manifest["annotated"] = summary.annotated;
  manifest["excluded"] = summary.excluded;
  manifest["usage"] = {{"prompt_tokens", summary.usage.prompt_tokens},
                       {"completion_tokens", summary.usage.completion_tokens},
                       {"estimated", summary.usage.estimated}};
  manifest["estimated_cost"] = summary.estimated_cost.str();
  std::filesystem::path manifest_path = config.output;
  manifest_path += ".manifest.json";
  atomic_write_file(manifest_path, manifest.dump(2) + "\n");

  return summary;
}

RunSummary run_batch(const RunConfig& config, const PoolProgress& progress) {
  SystemClock clock;
  if (config.mock_script) {
    MockBackend backend(load_mock_script(*config.mock_script), &clock);
    return run_batch(config, backend, clock, progress);
  }
  HttpBackend backend;
  return run_batch(config, backend, clock, progress);
}

RunSummary run_batch(const std::filesystem::path& config_file,
                     const PoolProgress& progress) {
  return run_batch(load_run_config(config_file), progress);
}

}  // namespace annotator
