#include "facexai/llm_client.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "facexai/image.hpp"

namespace facexai {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ValidationError("llm: base URL '" + url + "' has no scheme");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string redact(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(secret, pos)) != std::string::npos) text.replace(pos, secret.size(), "***");
  return text;
}

std::string api_key(const LlmEndpoint& endpoint) {
  if (endpoint.api_key_env.empty()) return {};
  const char* v = std::getenv(endpoint.api_key_env.c_str());
  return v ? v : "";
}

}  // namespace

HttpResponse HttpTransport::post(const std::string& url, const std::string& body,
                                 const std::map<std::string, std::string>& headers,
                                 double timeout_seconds) {
  const auto parts = split_url(url);
  httplib::Client client(parts.origin);
  const auto secs = static_cast<time_t>(timeout_seconds);
  const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers h;
  for (const auto& [k, v] : headers) {
    if (k != "Content-Type") h.emplace(k, v);
  }
  auto res = client.Post(parts.path, h, body, "application/json");
  if (!res) {
    throw ModelError("llm: request to " + parts.origin + " failed: " + httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

std::string build_chat_request(const std::string& prompt, const LlmEndpoint& endpoint) {
  nlohmann::json req = {{"model", endpoint.model},
                        {"messages", {{{"role", "user"}, {"content", prompt}}}},
                        {"temperature", endpoint.temperature},
                        {"max_tokens", endpoint.max_tokens}};
  return req.dump();
}

std::string parse_chat_response(const std::string& body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError(std::string("llm: response is not JSON: ") + e.what());
  }
  const auto* choices = doc.contains("choices") ? &doc.at("choices") : nullptr;
  if (!choices || !choices->is_array() || choices->empty()) {
    throw ModelError("llm: response has no choices");
  }
  const auto& first = choices->front();
  std::string text;
  if (first.contains("message") && first.at("message").contains("content") &&
      first.at("message").at("content").is_string()) {
    text = first.at("message").at("content").get<std::string>();
  } else if (first.contains("text") && first.at("text").is_string()) {
    text = first.at("text").get<std::string>();
  }
  if (text.empty()) throw ModelError("llm: empty completion");
  return text;
}

LlmClient::LlmClient(LlmEndpoint endpoint, LlmMode mode,
                     std::optional<std::filesystem::path> fixtures,
                     std::shared_ptr<Transport> transport,
                     std::optional<std::filesystem::path> log_path)
    : endpoint_(std::move(endpoint)),
      mode_(mode),
      fixtures_(std::move(fixtures)),
      transport_(mode == LlmMode::kOffline ? nullptr : std::move(transport)),
      log_path_(std::move(log_path)) {
  if (endpoint_.model.empty()) throw ValidationError("llm: model name is required");
  if (mode_ != LlmMode::kLive && !fixtures_) {
    throw ValidationError("llm: a fixtures directory is required to record or replay");
  }
  if (endpoint_.retries < 0) throw ValidationError("llm: retries must be >= 0");
  if (!(endpoint_.timeout_seconds > 0.0)) throw ValidationError("llm: timeout must be positive");
}

std::optional<std::string> LlmClient::load_fixture(const std::string& hash) const {
  const auto path = *fixtures_ / (hash + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const auto doc = nlohmann::json::parse(in);
    return doc.at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("llm fixture '" + path.string() + "' is malformed: " + e.what());
  }
}

void LlmClient::save_fixture(const std::string& hash, const std::string& request,
                             const std::string& response, const std::string& text) const {
  std::filesystem::create_directories(*fixtures_);
  nlohmann::json doc = {{"request", nlohmann::json::parse(request)},
                        {"response", response},
                        {"text", text}};
  std::ofstream out(*fixtures_ / (hash + ".json"));
  out << doc.dump(2) << "\n";
}

void LlmClient::log(const std::string& request, const HttpResponse& response, int attempt) const {
  if (!log_path_) return;
  const auto key = api_key(endpoint_);
  nlohmann::json entry = {{"url", endpoint_.base_url + "/chat/completions"},
                          {"attempt", attempt},
                          {"authorization", key.empty() ? "" : "Bearer ***"},
                          {"request", redact(request, key)},
                          {"status", response.status},
                          {"response", redact(response.body, key)}};
  std::ofstream out(*log_path_, std::ios::app);
  out << entry.dump() << "\n";
}

void LlmClient::throttle() {
  if (endpoint_.max_requests_per_second <= 0.0) return;
  const auto gap = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / endpoint_.max_requests_per_second));
  std::lock_guard lock(mutex_);
  const auto now = std::chrono::steady_clock::now();
  if (now < last_request_ + gap) std::this_thread::sleep_until(last_request_ + gap);
  last_request_ = std::chrono::steady_clock::now();
}

LlmResult LlmClient::generate(const std::string& prompt) {
  const auto request = build_chat_request(prompt, endpoint_);
  LlmResult result;
  result.request_hash = sha256_hex(request);

  if (mode_ == LlmMode::kOffline) {
    auto text = load_fixture(result.request_hash);
    if (!text) {
      throw FixtureMissing("llm: no recorded completion for request " + result.request_hash +
                           " (offline mode)");
    }
    result.text = std::move(*text);
    result.replayed = true;
    return result;
  }

  {
    std::lock_guard lock(mutex_);
    if (!transport_) transport_ = std::make_shared<HttpTransport>();
  }
  std::map<std::string, std::string> headers{{"Content-Type", "application/json"}};
  const auto key = api_key(endpoint_);
  if (!key.empty()) headers["Authorization"] = "Bearer " + key;
  const auto url = endpoint_.base_url + "/chat/completions";

  std::string last_error;
  const int attempts = endpoint_.retries + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    result.attempts = attempt;
    throttle();
    HttpResponse response;
    try {
      response = transport_->post(url, request, headers, endpoint_.timeout_seconds);
    } catch (const ModelError& e) {
      last_error = e.what();
      log(request, {0, last_error}, attempt);
      continue;
    }
    log(request, response, attempt);
    if (response.status == 200) {
      result.text = parse_chat_response(response.body);
      if (mode_ == LlmMode::kRecord) save_fixture(result.request_hash, request, response.body, result.text);
      return result;
    }
    last_error = "HTTP " + std::to_string(response.status) + ": " + redact(response.body, key);
    const bool retryable = response.status == 429 || response.status >= 500;
    if (!retryable) {
      throw ModelError("llm: " + last_error + " (attempt " + std::to_string(attempt) + ")");
    }
  }
  throw ModelError("llm: giving up after " + std::to_string(attempts) + " attempts: " + last_error);
}

}  // namespace facexai
