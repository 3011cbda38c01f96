#include <chrono>
#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

#include "annotator/backend.hpp"
#include "annotator/errors.hpp"
#include "annotator/text.hpp"

namespace annotator {

namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

ParsedUrl parse_base_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("api_base_url must include a scheme: " + url);
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  ParsedUrl parsed;
  if (path_start == std::string::npos) {
    parsed.origin = url;
  } else {
    parsed.origin = url.substr(0, path_start);
    parsed.prefix = url.substr(path_start);
    while (!parsed.prefix.empty() && parsed.prefix.back() == '/') {
      parsed.prefix.pop_back();
    }
  }
  return parsed;
}

}  // namespace

ChatExchange HttpBackend::complete(const PromptBundle& bundle,
                                   const BackendConfig& config,
                                   const JobContext* /*context*/) {
  const char* api_key = std::getenv(config.api_key_env.c_str());
  if (api_key == nullptr || *api_key == '\0') {
    throw AuthMissingError(config.api_key_env);
  }

  const ParsedUrl url = parse_base_url(config.api_base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(config.request_timeout);
  client.set_read_timeout(config.request_timeout);
  client.set_write_timeout(config.request_timeout);

  json body;
  body["model"] = config.model_id;
  body["messages"] = {{{"role", "system"}, {"content", bundle.system_message}},
                      {{"role", "user"}, {"content", bundle.user_message}}};
  body["temperature"] = config.temperature;
  body["max_tokens"] = config.max_output_tokens;

  const httplib::Headers headers = {
      {"Authorization", std::string("Bearer ") + api_key}};

  const auto start = std::chrono::steady_clock::now();
  httplib::Result result = client.Post(url.prefix + "/chat/completions",
                                       headers, body.dump(),
                                       "application/json");
  const auto latency = std::chrono::duration_cast<Duration>(
      std::chrono::steady_clock::now() - start);

  if (!result) {
    throw TransportError("request failed: " + httplib::to_string(result.error()));
  }
  if (result->status == 429) {
    throw RateLimitedError("rate limited: " + result->body);
  }
  if (result->status < 200 || result->status >= 300) {
    throw ApiError(result->status, result->body);
  }

  json payload;
  try {
    payload = json::parse(result->body);
  } catch (const json::exception& ex) {
    throw ApiError(result->status,
                   std::string("unparseable response body: ") + ex.what());
  }
  if (!payload.contains("choices") || payload.at("choices").empty() ||
      !payload.at("choices")[0].contains("message")) {
    throw ApiError(result->status, "response lacks choices[0].message");
  }

  ChatExchange exchange;
  exchange.request.model_id = config.model_id;
  exchange.request.messages = {{"system", bundle.system_message},
                               {"user", bundle.user_message}};
  exchange.request.temperature = config.temperature;
  exchange.response_text =
      payload.at("choices")[0].at("message").value("content", "");
  exchange.latency = latency;

  if (payload.contains("usage") && payload.at("usage").is_object()) {
    const json& usage = payload.at("usage");
    exchange.usage.prompt_tokens = usage.value("prompt_tokens", 0ULL);
    exchange.usage.completion_tokens = usage.value("completion_tokens", 0ULL);
    exchange.usage.estimated = false;
  } else {
    exchange.usage.prompt_tokens = estimate_tokens(bundle.system_message) +
                                   estimate_tokens(bundle.user_message);
    exchange.usage.completion_tokens = estimate_tokens(exchange.response_text);
    exchange.usage.estimated = true;
  }
  return exchange;
}

}  // namespace annotator
