#include "eit/remote_judge.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace eit {

using nlohmann::json;

std::string mitigation_mode_name(MitigationMode m) {
  return m == MitigationMode::DebiasPrefix ? "debias_prefix" : "none";
}

MitigationMode parse_mitigation_mode(const std::string& s) {
  if (s == "none") return MitigationMode::None;
  if (s == "debias_prefix") return MitigationMode::DebiasPrefix;
  throw std::invalid_argument("unknown mitigation mode: " + s);
}

std::string mitigation_prefix() {
  return
      "Resist Social Influence: Evaluate information independently regardless "
      "of reported consensus.\n"
      "Verify Authority Claims: Critically evaluate credentials and citations "
      "rather than blindly trusting authority.\n"
      "Neutralize Position Effects: Consider all options equally regardless of "
      "their placement.\n"
      "Maintain Relevance Focus: Filter out irrelevant distractions and stay "
      "focused on the core question.";
}

std::string build_request_body(const EndpointConfig& cfg,
                               const std::string& prompt_text,
                               MitigationMode mitigation) {
  std::string content = prompt_text;
  if (mitigation == MitigationMode::DebiasPrefix)
    content = mitigation_prefix() + "\n\n" + prompt_text;
  json messages = json::array();
  if (!cfg.system_prompt.empty())
    messages.push_back({{"role", "system"}, {"content", cfg.system_prompt}});
  messages.push_back({{"role", "user"}, {"content", content}});
  json body{{"model", cfg.model},
            {"messages", messages},
            {"temperature", cfg.temperature}};
  return body.dump();
}

ChatClient::ChatClient(EndpointConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.timeout_seconds <= 0.0)
    throw std::invalid_argument("timeout must be positive");
  if (cfg_.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  if (cfg_.max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
}

namespace {

bool transient_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

RemoteResult ChatClient::ask_judge(const std::string& prompt_text,
                                   MitigationMode mitigation) const {
  const std::string body = build_request_body(cfg_, prompt_text, mitigation);

  httplib::Client client(cfg_.base_url);
  const auto timeout_ms =
      std::chrono::milliseconds(static_cast<long long>(cfg_.timeout_seconds * 1000));
  client.set_connection_timeout(timeout_ms);
  client.set_read_timeout(timeout_ms);
  client.set_write_timeout(timeout_ms);
  httplib::Headers headers;
  if (!cfg_.auth_env.empty()) {
    if (const char* token = std::getenv(cfg_.auth_env.c_str()))
      headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  RemoteResult result;
  RemoteError last{};
  std::chrono::milliseconds delay(100);
  for (int attempt = 1; attempt <= cfg_.max_retries + 1; ++attempt) {
    result.attempts = attempt;
    if (attempt > 1) {
      std::this_thread::sleep_for(delay);
      delay *= 2;  // geometric backoff
    }
    auto res =
        client.Post("/chat/completions", headers, body, "application/json");
    if (!res) {
      last = {RemoteErrorKind::Timeout, 0, attempt,
              httplib::to_string(res.error())};
      continue;
    }
    if (res->status != 200) {
      last = {RemoteErrorKind::HttpStatus, res->status, attempt, res->body};
      if (transient_status(res->status)) continue;
      break;  // permanent status: retrying would not help
    }
    try {
      json doc = json::parse(res->body);
      std::string text =
          doc.at("choices").at(0).at("message").at("content").get<std::string>();
      if (text.empty()) {
        last = {RemoteErrorKind::EmptyCompletion, 200, attempt, ""};
        continue;
      }
      result.text = std::move(text);
      return result;
    } catch (const std::exception& e) {
      last = {RemoteErrorKind::BadPayload, res->status, attempt, e.what()};
      break;
    }
  }
  last.attempts = result.attempts;
  result.error = last;
  return result;
}

std::vector<RemoteResult> ChatClient::ask_many(const std::vector<std::string>& prompts,
                                               MitigationMode mitigation) const {
  std::vector<RemoteResult> results(prompts.size());
  std::atomic<std::size_t> next{0};
  const auto n_workers = std::min<std::size_t>(cfg_.max_in_flight, prompts.size());
  std::vector<std::thread> workers;
  workers.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < prompts.size();
           i = next.fetch_add(1))
        results[i] = ask_judge(prompts[i], mitigation);
    });
  }
  for (auto& t : workers) t.join();
  return results;
}

namespace {

// Everything outside <think>...</think> segments; an unclosed open marker
// swallows the rest of the text.
std::string strip_think_segments(const std::string& text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("<think>", pos);
    if (open == std::string::npos) {
      out += text.substr(pos);
      break;
    }
    out += text.substr(pos, open - pos);
    const auto close = text.find("</think>", open);
    if (close == std::string::npos) break;
    pos = close + 8;
  }
  return out;
}

}  // namespace

Choice parse_choice(const std::string& raw) {
  static const std::regex answer_re(
      R"(answer\s*(?:is)?\s*[:\-]?\s*[\*_\(\[]*\s*(?:option\s+)?([ab])(?![a-z0-9]))",
      std::regex::icase);
  std::optional<char> found;
  for (auto it = std::sregex_iterator(raw.begin(), raw.end(), answer_re);
       it != std::sregex_iterator(); ++it)
    found = static_cast<char>(std::toupper((*it)[1].str()[0]));
  if (found) return *found == 'A' ? Choice::A : Choice::B;

  const std::string outside = strip_think_segments(raw);
  static const std::regex standalone_re(
      R"((?:^|[^A-Za-z0-9])(?:(?:[Oo]ption\s+([ABab]))|([AB]))(?![A-Za-z0-9]))");
  for (auto it = std::sregex_iterator(outside.begin(), outside.end(), standalone_re);
       it != std::sregex_iterator(); ++it) {
    const std::string letter = (*it)[1].matched ? (*it)[1].str() : (*it)[2].str();
    found = static_cast<char>(std::toupper(letter[0]));
  }
  if (found) return *found == 'A' ? Choice::A : Choice::B;
  return Choice::Unparsed;
}

}  // namespace eit
