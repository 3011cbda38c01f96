#include <thread>

#include "json.hpp"

#include "annotator/backend.hpp"
#include "annotator/errors.hpp"
#include "annotator/io.hpp"
#include "annotator/text.hpp"

namespace annotator {

namespace {

using nlohmann::json;

MockStep parse_step(const json& value,
                    const std::filesystem::path& script_dir) {
  if (!value.is_object()) {
    throw ConfigError("mock step must be an object");
  }
  MockStep step;
  if (value.contains("text")) {
    step.text = value.at("text").get<std::string>();
  } else if (value.contains("text_file")) {
    step.text = read_file(script_dir / value.at("text_file").get<std::string>());
  } else if (value.contains("error")) {
    step.error = value.at("error").get<std::string>();
    if (*step.error != "transport" && *step.error != "rate_limited" &&
        *step.error != "api") {
      throw ConfigError("mock error must be transport|rate_limited|api");
    }
    step.status = value.value("status", 500);
  } else {
    throw ConfigError("mock step needs text, text_file, or error");
  }
  step.delay_ms = value.value("delay_ms", 0);
  return step;
}

std::vector<MockStep> parse_steps(const json& value,
                                  const std::filesystem::path& script_dir) {
  std::vector<MockStep> steps;
  if (value.is_array()) {
    for (const json& entry : value) steps.push_back(parse_step(entry, script_dir));
  } else {
    steps.push_back(parse_step(value, script_dir));
  }
  if (steps.empty()) throw ConfigError("mock step list is empty");
  return steps;
}

struct InFlightGuard {
  MockBackend* backend;
  std::function<void()> release;
  ~InFlightGuard() { release(); }
};

}  // namespace

MockScript load_mock_script(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("invalid mock script: ") + ex.what());
  }
  const std::filesystem::path dir =
      path.parent_path().empty() ? "." : path.parent_path();
  MockScript script;
  if (doc.contains("default")) {
    script.default_steps = parse_steps(doc.at("default"), dir);
  }
  if (doc.contains("by_id")) {
    for (const auto& [id, steps] : doc.at("by_id").items()) {
      script.by_id[id] = parse_steps(steps, dir);
    }
  }
  if (doc.contains("by_index")) {
    for (const auto& [index, steps] : doc.at("by_index").items()) {
      script.by_index[std::stoul(index)] = parse_steps(steps, dir);
    }
  }
  if (script.default_steps.empty() && script.by_id.empty() &&
      script.by_index.empty()) {
    throw ConfigError("mock script defines no steps");
  }
  return script;
}

MockScript mock_script_always(std::string text) {
  MockScript script;
  MockStep step;
  step.text = std::move(text);
  script.default_steps.push_back(std::move(step));
  return script;
}

MockBackend::MockBackend(MockScript script, Clock* clock)
    : script_(std::move(script)), clock_(clock) {}

const std::vector<MockStep>& MockBackend::steps_for(
    const JobContext* context) const {
  if (context) {
    const auto by_id = script_.by_id.find(context->id);
    if (by_id != script_.by_id.end()) return by_id->second;
    const auto by_index = script_.by_index.find(context->index);
    if (by_index != script_.by_index.end()) return by_index->second;
  }
  if (script_.default_steps.empty()) {
    throw ConfigError("mock script has no entry for job \"" +
                      (context ? context->id : std::string("<direct>")) + "\"");
  }
  return script_.default_steps;
}

ChatExchange MockBackend::complete(const PromptBundle& bundle,
                                   const BackendConfig& config,
                                   const JobContext* context) {
  const std::vector<MockStep>& steps = steps_for(context);
  const std::string key = context ? context->id : "<direct>";
  int call_number = 0;
  {
    std::lock_guard lock(mutex_);
    call_number = ++calls_[key];
    ++total_calls_;
    ++in_flight_;
    high_water_ = std::max(high_water_, in_flight_);
  }
  InFlightGuard guard{this, [this] {
                       std::lock_guard lock(mutex_);
                       --in_flight_;
                     }};

  const MockStep& step =
      steps[std::min<std::size_t>(static_cast<std::size_t>(call_number - 1),
                                  steps.size() - 1)];
  if (step.delay_ms > 0) {
    if (clock_) {
      clock_->sleep_for(Duration{step.delay_ms});
    } else {
      std::this_thread::sleep_for(Duration{step.delay_ms});
    }
  }

  if (step.error) {
    if (*step.error == "transport") {
      throw TransportError("scripted transport failure");
    }
    if (*step.error == "rate_limited") {
      throw RateLimitedError("scripted rate limit");
    }
    throw ApiError(step.status, "scripted api failure");
  }

  ChatExchange exchange;
  exchange.request.model_id = config.model_id;
  exchange.request.messages = {{"system", bundle.system_message},
                               {"user", bundle.user_message}};
  exchange.request.temperature = config.temperature;
  exchange.response_text = *step.text;
  exchange.usage.prompt_tokens = estimate_tokens(bundle.system_message) +
                                 estimate_tokens(bundle.user_message);
  exchange.usage.completion_tokens = estimate_tokens(exchange.response_text);
  exchange.usage.estimated = true;
  exchange.latency = Duration{step.delay_ms};
  return exchange;
}

int MockBackend::calls_for(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = calls_.find(id);
  return it == calls_.end() ? 0 : it->second;
}

int MockBackend::total_calls() const {
  std::lock_guard lock(mutex_);
  return total_calls_;
}

int MockBackend::high_water_concurrency() const {
  std::lock_guard lock(mutex_);
  return high_water_;
}

}  // namespace annotator
