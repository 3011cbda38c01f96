#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "annotator/backend.hpp"
#include "annotator/corpus.hpp"
#include "annotator/cost.hpp"
#include "annotator/errors.hpp"
#include "annotator/io.hpp"
#include "annotator/metrics.hpp"
#include "annotator/pipeline.hpp"
#include "annotator/prompt.hpp"
#include "annotator/version.hpp"

namespace {

using annotator::ConfigError;
using nlohmann::ordered_json;

std::string version_text() {
  std::string out = std::string(annotator::kToolName) + " " +
                    annotator::kToolVersion + "\ntemplates:";
  for (const std::string& id :
       annotator::TemplateRegistry::with_builtins().ids()) {
    out += " " + id;
  }
  return out;
}

struct AnnotateArgs {
  std::string config_file;
  std::string task = "captioning";
  std::string target_lang;
  std::string template_ref;
  int n_paraphrases = -1;
  std::string input;
  std::string output;
  std::string exclusions;
  int workers = -1;
  int patience = -1;
  std::string model;
  std::string api_base;
  std::string api_key_env;
  std::string mock;
  bool resume = false;
  std::optional<std::uint32_t> rpm;
  double temperature = -1.0;
  std::int64_t backoff_ms = -1;
};

int cmd_annotate(const AnnotateArgs& args, const CLI::App& cmd) {
  annotator::RunConfig config;
  if (!args.config_file.empty()) {
    config = annotator::load_run_config(args.config_file);
  }
  const auto passed = [&](const char* flag) { return cmd.count(flag) > 0; };

  if (passed("--task")) config.task = annotator::task_from_name(args.task);
  if (passed("--target-lang")) {
    config.target_language = annotator::language_from_arg(args.target_lang);
  }
  if (passed("--template")) config.template_ref = args.template_ref;
  if (passed("--n-paraphrases")) config.n_paraphrases = args.n_paraphrases;
  if (args.config_file.empty() && !passed("--n-paraphrases") &&
      config.task == annotator::Task::StyleTransfer) {
    config.n_paraphrases = 1;
  }
  if (passed("--input")) config.input = args.input;
  if (passed("--output")) config.output = args.output;
  if (passed("--exclusions")) config.exclusions = args.exclusions;
  if (passed("--workers")) config.backend.max_concurrency = args.workers;
  if (passed("--patience")) config.backend.patience = args.patience;
  if (passed("--model")) config.backend.model_id = args.model;
  if (passed("--api-base")) config.backend.api_base_url = args.api_base;
  if (passed("--api-key-env")) config.backend.api_key_env = args.api_key_env;
  if (passed("--mock")) config.mock_script = args.mock;
  if (passed("--resume")) config.resume = true;
  if (passed("--rpm")) config.backend.requests_per_minute = args.rpm;
  if (passed("--temperature")) config.backend.temperature = args.temperature;
  if (passed("--backoff-ms")) {
    config.backend.retry_backoff_base = annotator::Duration{args.backoff_ms};
  }
  if (config.exclusions.empty()) {
    config.exclusions = config.output;
    config.exclusions += ".exclusions.jsonl";
  }

  // Offline mode makes zero network calls; a remote endpoint is a mistake.
  if (config.mock_script && (passed("--api-base") || passed("--api-key-env"))) {
    throw ConfigError("--mock cannot be combined with --api-base/--api-key-env");
  }

  const annotator::PoolProgress progress =
      [](const annotator::PoolResult& result) {
        if (result.outcome.ok()) {
          std::cerr << "annotated " << result.id << " (attempts "
                    << result.outcome.attempts << ")\n";
        } else {
          std::cerr << "excluded " << result.id << ": "
                    << result.outcome.exclusion->last_error << "\n";
        }
      };

  const annotator::RunSummary summary = annotator::run_batch(config, progress);
  std::cerr << annotator::render_summary_json(summary) << "\n";
  if (summary.total_items > 0 && summary.annotated == 0) return 2;
  return 0;
}

int cmd_split(const std::string& input, const std::string& ratios,
              std::uint64_t seed, const std::string& out_prefix) {
  const annotator::SplitSpec spec = annotator::parse_split_spec(ratios, seed);
  ordered_json doc;
  try {
    doc = ordered_json::parse(annotator::read_file(input));
  } catch (const nlohmann::json::exception& ex) {
    throw annotator::MalformedInputError(std::string("invalid JSON: ") +
                                         ex.what());
  }
  if (!doc.is_array() || doc.empty()) {
    throw annotator::EmptyCorpusError();
  }

  // Validate the file through the matching loader before partitioning.
  if (doc[0].contains("gold")) {
    annotator::load_dataset(input);
  } else if (doc[0].contains("gold_caption")) {
    annotator::load_corpus(input, annotator::Task::Captioning);
  } else if (doc[0].contains("informal")) {
    annotator::load_corpus(input, annotator::Task::StyleTransfer);
  } else {
    throw annotator::MalformedInputError("unrecognised input schema");
  }

  const auto parts = annotator::split_indices(doc.size(), spec);
  const char* names[3] = {"train", "val", "test"};
  for (int part = 0; part < 3; ++part) {
    ordered_json slice = ordered_json::array();
    for (const std::size_t i : parts[static_cast<std::size_t>(part)]) {
      slice.push_back(doc[i]);
    }
    const std::filesystem::path path =
        out_prefix + std::string(names[part]) + ".json";
    annotator::atomic_write_file(path, slice.dump(2) + "\n");
    std::cerr << names[part] << ": " << slice.size() << " -> " << path.string()
              << "\n";
  }
  return 0;
}

struct CostArgs {
  std::int64_t items = 0;
  std::string budget;
  std::string human_per_gold;
  int golds_human = -1;
  std::string price_1k;
  std::int64_t tokens_per_item = -1;
  std::string split_pricing;
  std::int64_t prompt_tokens = -1;
  std::int64_t completion_tokens = -1;
  std::string mode = "human_only";
  std::string format = "table";
};

int cmd_cost(const CostArgs& args, const CLI::App& cmd) {
  annotator::CostModel model;
  if (cmd.count("--human-per-gold")) {
    model.human_cost_per_gold = annotator::Money::parse(args.human_per_gold);
  }
  if (cmd.count("--golds-human")) model.golds_per_item_human = args.golds_human;
  if (cmd.count("--price-1k")) {
    model.price_per_1k_tokens = annotator::Money::parse(args.price_1k);
  }
  if (cmd.count("--tokens-per-item")) model.tokens_per_item = args.tokens_per_item;
  if (cmd.count("--split-pricing")) {
    const std::size_t colon = args.split_pricing.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("--split-pricing wants <prompt>:<completion>");
    }
    annotator::SplitPricing split;
    split.prompt_per_1k =
        annotator::Money::parse(args.split_pricing.substr(0, colon));
    split.completion_per_1k =
        annotator::Money::parse(args.split_pricing.substr(colon + 1));
    const std::int64_t total = cmd.count("--tokens-per-item")
                                   ? args.tokens_per_item
                                   : model.tokens_per_item;
    split.prompt_tokens_per_item =
        args.prompt_tokens >= 0 ? args.prompt_tokens : total / 2;
    split.completion_tokens_per_item = args.completion_tokens >= 0
                                           ? args.completion_tokens
                                           : total - total / 2;
    model.split_pricing = split;
  }

  const bool want_json = args.format == "json";
  ordered_json out;
  if (cmd.count("--items")) {
    const annotator::CostReport report =
        annotator::compare_report(model, args.items);
    if (want_json) {
      out = ordered_json::parse(annotator::render_cost_json(report));
    } else {
      std::cout << annotator::render_cost_table(report);
    }
  }
  if (cmd.count("--budget")) {
    const annotator::Money budget = annotator::Money::parse(args.budget);
    ordered_json coverage;
    for (const auto mode :
         {annotator::CostMode::HumanOnly, annotator::CostMode::Assisted}) {
      coverage[annotator::cost_mode_name(mode)] =
          annotator::coverage_under_budget(model, budget, mode);
    }
    if (want_json) {
      out["budget"] = budget.str();
      out["coverage_under_budget"] = coverage;
    } else {
      std::cout << "budget " << budget.str() << ": human_only "
                << coverage["human_only"].get<std::int64_t>() << ", assisted "
                << coverage["assisted"].get<std::int64_t>() << "\n";
    }
  }
  if (!cmd.count("--items") && !cmd.count("--budget")) {
    throw ConfigError("cost needs --items and/or --budget");
  }
  if (want_json) std::cout << out.dump(2) << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string candidates;
  std::string references;
  std::string metrics = "bleu,rouge_l,meteor_lite";
  std::string lang = "en";
  std::string format = "table";
  std::string out_file;
  bool smooth_bleu = false;
  bool per_sentence = false;
};

int cmd_evaluate(const EvaluateArgs& args) {
  annotator::EvalOptions options;
  options.metrics.clear();
  std::size_t start = 0;
  for (std::size_t i = 0; i <= args.metrics.size(); ++i) {
    if (i == args.metrics.size() || args.metrics[i] == ',') {
      const std::string name = args.metrics.substr(start, i - start);
      if (!name.empty()) options.metrics.insert(name);
      start = i + 1;
    }
  }
  options.language = annotator::language_from_arg(args.lang);
  options.smoothing = args.smooth_bleu ? annotator::BleuSmoothing::AddOne
                                       : annotator::BleuSmoothing::None;
  options.per_sentence = args.per_sentence;

  const annotator::EvalReport report =
      annotator::evaluate_dataset(args.candidates, args.references, options);
  const std::string json_text = annotator::render_eval_json(report);
  if (!args.out_file.empty()) {
    annotator::atomic_write_file(args.out_file, json_text);
  }
  if (args.format == "json") {
    std::cout << json_text;
  } else {
    std::cout << annotator::render_eval_table(report);
  }
  return 0;
}

int cmd_validate(const std::string& input, const std::string& kind) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(annotator::read_file(input));
  } catch (const nlohmann::json::exception& ex) {
    std::cout << "invalid JSON: " << ex.what() << "\n";
    return 1;
  }
  if (!doc.is_array()) {
    std::cout << "top-level value must be an array\n";
    return 1;
  }
  std::string detected = kind;
  if (detected == "auto") {
    if (!doc.empty() && doc[0].is_object() && doc[0].contains("gold")) {
      detected = "dataset";
    } else if (!doc.empty() && doc[0].is_object() &&
               doc[0].contains("informal")) {
      detected = "tst";
    } else {
      detected = "captioning";
    }
  }
  try {
    if (detected == "dataset") {
      annotator::load_dataset(input);
    } else {
      annotator::load_corpus(input, annotator::task_from_name(detected));
    }
  } catch (const annotator::Error& error) {
    std::cout << error.what() << "\n";
    return 1;
  }
  std::cout << "ok: " << doc.size() << " " << detected << " records\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLM-assisted multilingual data annotation toolkit"};
  app.set_version_flag("--version", version_text());
  app.require_subcommand(1);

  AnnotateArgs annotate_args;
  CLI::App* annotate = app.add_subcommand(
      "annotate", "Generate silver annotations for a corpus");
  annotate->add_option("--config", annotate_args.config_file,
                       "Run-config JSON file; flags override its fields");
  annotate->add_option("--task", annotate_args.task, "captioning|tst");
  annotate->add_option("--target-lang", annotate_args.target_lang,
                       "Language code or code:DisplayName");
  annotate->add_option("--template", annotate_args.template_ref,
                       "Template id or file path");
  annotate->add_option("--n-paraphrases", annotate_args.n_paraphrases,
                       "Paraphrases beyond the translation (captioning)");
  annotate->add_option("--input", annotate_args.input, "Corpus JSON file");
  annotate->add_option("--output", annotate_args.output, "Dataset JSON file");
  annotate->add_option("--exclusions", annotate_args.exclusions,
                       "Exclusion log path (JSON lines)");
  annotate->add_option("--workers", annotate_args.workers,
                       "Maximum concurrent requests");
  annotate->add_option("--patience", annotate_args.patience,
                       "Attempts per item before exclusion");
  annotate->add_option("--model", annotate_args.model, "Model id");
  annotate->add_option("--api-base", annotate_args.api_base,
                       "Chat-completion API base URL");
  annotate->add_option("--api-key-env", annotate_args.api_key_env,
                       "Environment variable holding the API key");
  annotate->add_option("--mock", annotate_args.mock,
                       "Mock-backend script (offline mode)");
  annotate->add_flag("--resume", annotate_args.resume,
                     "Retry only previously excluded items");
  annotate->add_option("--rpm", annotate_args.rpm, "Requests per minute cap");
  annotate->add_option("--temperature", annotate_args.temperature,
                       "Sampling temperature");
  annotate->add_option("--backoff-ms", annotate_args.backoff_ms,
                       "Base retry backoff in milliseconds");

  std::string split_input;
  std::string split_ratios = "8:1:1";
  std::uint64_t split_seed = 0;
  std::string split_prefix;
  CLI::App* split = app.add_subcommand(
      "split", "Partition a corpus or dataset into train/val/test");
  split->add_option("--input", split_input, "Input JSON file")->required();
  split->add_option("--ratios", split_ratios, "e.g. 8:1:1 or 0.70:0.24:0.06");
  split->add_option("--seed", split_seed, "Shuffle seed");
  split->add_option("--out-prefix", split_prefix, "Output path prefix")
      ->required();

  CostArgs cost_args;
  CLI::App* cost = app.add_subcommand(
      "cost", "Compare human-only and assisted annotation budgets");
  cost->add_option("--items", cost_args.items, "Number of items to annotate");
  cost->add_option("--budget", cost_args.budget, "Budget, e.g. 76.80");
  cost->add_option("--human-per-gold", cost_args.human_per_gold,
                   "Human price per gold annotation");
  cost->add_option("--golds-human", cost_args.golds_human,
                   "Gold annotations per item, human-only mode");
  cost->add_option("--price-1k", cost_args.price_1k,
                   "Blended price per 1000 tokens");
  cost->add_option("--tokens-per-item", cost_args.tokens_per_item,
                   "Tokens used per annotated item");
  cost->add_option("--split-pricing", cost_args.split_pricing,
                   "<prompt>:<completion> prices per 1000 tokens");
  cost->add_option("--prompt-tokens", cost_args.prompt_tokens,
                   "Prompt tokens per item (split pricing)");
  cost->add_option("--completion-tokens", cost_args.completion_tokens,
                   "Completion tokens per item (split pricing)");
  cost->add_option("--format", cost_args.format, "table|json");

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score candidates against multi-reference sets");
  evaluate->add_option("--candidates", eval_args.candidates,
                       "Candidate JSON file [{id, text}]")
      ->required();
  evaluate->add_option("--references", eval_args.references,
                       "Reference JSON file [{id, references}]")
      ->required();
  evaluate->add_option("--metrics", eval_args.metrics,
                       "Comma list: bleu,rouge_l,meteor_lite");
  evaluate->add_option("--lang", eval_args.lang, "Language tag for tokenizing");
  evaluate->add_option("--format", eval_args.format, "table|json");
  evaluate->add_option("--out", eval_args.out_file, "Write report JSON here");
  evaluate->add_flag("--smooth-bleu", eval_args.smooth_bleu,
                     "Add-one BLEU smoothing for tiny corpora");
  evaluate->add_flag("--per-sentence", eval_args.per_sentence,
                     "Include per-sentence scores");

  std::string validate_input;
  std::string validate_kind = "auto";
  CLI::App* validate = app.add_subcommand(
      "validate", "Check a corpus or dataset file against its schema");
  validate->add_option("--input", validate_input, "JSON file")->required();
  validate->add_option("--kind", validate_kind,
                       "auto|captioning|tst|dataset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (annotate->parsed()) return cmd_annotate(annotate_args, *annotate);
    if (split->parsed()) {
      return cmd_split(split_input, split_ratios, split_seed, split_prefix);
    }
    if (cost->parsed()) return cmd_cost(cost_args, *cost);
    if (evaluate->parsed()) return cmd_evaluate(eval_args);
    if (validate->parsed()) return cmd_validate(validate_input, validate_kind);
  } catch (const annotator::Error& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
