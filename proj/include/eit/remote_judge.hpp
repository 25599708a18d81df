#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eit/types.hpp"

namespace eit {

struct EndpointConfig {
  std::string base_url;           // e.g. http://localhost:8080
  std::string model;
  std::string auth_env;           // name of the env var holding the bearer token
  std::string system_prompt;      // optional judge instruction wrapper
  double timeout_seconds = 30.0;
  int max_retries = 2;
  int max_in_flight = 4;
  double temperature = 0.0;
};

enum class MitigationMode { None, DebiasPrefix };

std::string mitigation_mode_name(MitigationMode m);
MitigationMode parse_mitigation_mode(const std::string& s);

// Four debiasing instructions, one per line, prepended to the user prompt.
std::string mitigation_prefix();

// Deterministic chat-completions request body (keys serialized sorted).
std::string build_request_body(const EndpointConfig& cfg, const std::string& prompt_text,
                               MitigationMode mitigation);

enum class RemoteErrorKind { Timeout, HttpStatus, EmptyCompletion, BadPayload };

struct RemoteError {
  RemoteErrorKind kind = RemoteErrorKind::Timeout;
  int http_status = 0;     // set for HttpStatus
  int attempts = 0;
  std::string detail;
};

struct RemoteResult {
  std::string text;                  // assistant text when ok
  std::optional<RemoteError> error;  // set on failure
  int attempts = 0;

  bool ok() const { return !error.has_value(); }
};

class ChatClient {
 public:
  explicit ChatClient(EndpointConfig cfg);

  // Single-turn request with exponential backoff on transient failures
  // (connection errors, timeouts, 429, 5xx). At most 1 + max_retries attempts.
  RemoteResult ask_judge(const std::string& prompt_text, MitigationMode mitigation) const;

  // Concurrent map over prompts, bounded by max_in_flight; results are
  // returned in input order.
  std::vector<RemoteResult> ask_many(const std::vector<std::string>& prompts,
                                     MitigationMode mitigation) const;

  const EndpointConfig& config() const { return cfg_; }

 private:
  EndpointConfig cfg_;
};

// Extraction precedence: (1) the last "Answer: A/B" occurrence, case
// insensitive; (2) the last standalone option letter outside think-delimited
// segments; (3) unparsed.
Choice parse_choice(const std::string& raw);

}  // namespace eit
