#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace annotator {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- configuration / IO ----

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// ---- corpus ----

struct MalformedInputError : Error {
  std::size_t record_index;
  MalformedInputError(std::string message, std::size_t index)
      : Error("record " + std::to_string(index) + ": " + std::move(message)),
        record_index(index) {}
  explicit MalformedInputError(std::string message)
      : Error(std::move(message)), record_index(0) {}
};

struct DuplicateIdError : Error {
  std::string id;
  explicit DuplicateIdError(std::string duplicate)
      : Error("duplicate id \"" + duplicate + "\""), id(std::move(duplicate)) {}
};

struct MissingGoldError : Error {
  std::string id;
  explicit MissingGoldError(std::string item_id)
      : Error("item \"" + item_id + "\" has no gold annotation"),
        id(std::move(item_id)) {}
};

struct InvariantViolationError : Error {
  std::string id;
  InvariantViolationError(std::string item_id, const std::string& message)
      : Error("record \"" + item_id + "\": " + message), id(std::move(item_id)) {}
};

struct EmptyCorpusError : Error {
  EmptyCorpusError() : Error("corpus is empty") {}
};

// ---- prompt ----

struct DuplicateTemplateIdError : Error {
  explicit DuplicateTemplateIdError(const std::string& id)
      : Error("template id \"" + id + "\" already registered") {}
};

struct MalformedTemplateError : Error {
  using Error::Error;
};

struct TaskMismatchError : Error {
  using Error::Error;
};

struct NonEnglishGoldError : Error {
  using Error::Error;
};

// ---- backend ----

struct BackendError : Error {
  bool retryable;
  BackendError(std::string message, bool can_retry)
      : Error(std::move(message)), retryable(can_retry) {}
};

struct TransportError : BackendError {
  explicit TransportError(std::string message)
      : BackendError(std::move(message), true) {}
};

struct RateLimitedError : BackendError {
  explicit RateLimitedError(std::string message)
      : BackendError(std::move(message), true) {}
};

struct ApiError : BackendError {
  int status;
  ApiError(int http_status, std::string body)
      : BackendError("api error (status " + std::to_string(http_status) + "): " + body,
                     true),
        status(http_status) {}
};

struct AuthMissingError : BackendError {
  explicit AuthMissingError(const std::string& env_name)
      : BackendError("api key environment variable " + env_name + " is not set",
                     false) {}
};

struct PoolAbortedError : Error {
  PoolAbortedError() : Error("worker pool aborted by cancel signal") {}
};

// ---- metrics ----

struct LengthMismatchError : Error {
  using Error::Error;
};

struct EmptyReferenceSetError : Error {
  using Error::Error;
};

struct IdMismatchError : Error {
  using Error::Error;
};

struct UnsupportedMetricError : Error {
  explicit UnsupportedMetricError(const std::string& name)
      : Error("unsupported metric \"" + name + "\"") {}
};

// ---- cost ----

struct FreeAnnotationUndefinedError : Error {
  FreeAnnotationUndefinedError()
      : Error("coverage is undefined when the per-item cost is zero") {}
};

}  // namespace annotator
