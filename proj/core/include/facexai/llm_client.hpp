#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "facexai/error.hpp"

namespace facexai {

// OpenAI-compatible chat-completions endpoint.
struct LlmEndpoint {
  std::string base_url = "http://127.0.0.1:8080/v1";
  std::string model;
  std::string api_key_env = "LLM_API_KEY";
  double temperature = 0.2;
  int max_tokens = 512;
  double timeout_seconds = 60.0;
  int retries = 2;
  double max_requests_per_second = 0.0;  // 0: no ceiling
};

// Offline mode found no recorded completion for a request.
class FixtureMissing : public Error {
 public:
  using Error::Error;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Minimal POST capability; replaced in tests.
class Transport {
 public:
  virtual ~Transport() = default;
  // Throws ModelError on connection failure or timeout.
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers,
                            double timeout_seconds) = 0;
};

// cpp-httplib over http or https.
class HttpTransport final : public Transport {
 public:
  HttpResponse post(const std::string& url, const std::string& body,
                    const std::map<std::string, std::string>& headers,
                    double timeout_seconds) override;
};

enum class LlmMode {
  kLive,     // call the endpoint
  kRecord,   // call the endpoint and store each completion
  kOffline,  // replay stored completions only; never touches the network
};

struct LlmResult {
  std::string text;
  std::string request_hash;
  bool replayed = false;
  int attempts = 0;
};

// Canonical request JSON (sorted keys, no whitespace).
std::string build_chat_request(const std::string& prompt, const LlmEndpoint& endpoint);
// First choice's message content. Throws ModelError when absent or empty.
std::string parse_chat_response(const std::string& body);

class LlmClient {
 public:
  // `transport` defaults to HttpTransport and is created lazily, never in
  // offline mode. `fixtures` is required for record and offline modes.
  LlmClient(LlmEndpoint endpoint, LlmMode mode, std::optional<std::filesystem::path> fixtures,
            std::shared_ptr<Transport> transport = nullptr,
            std::optional<std::filesystem::path> log_path = std::nullopt);

  LlmResult generate(const std::string& prompt);

  const LlmEndpoint& endpoint() const { return endpoint_; }
  LlmMode mode() const { return mode_; }
  bool transport_created() const { return transport_ != nullptr; }

 private:
  std::optional<std::string> load_fixture(const std::string& hash) const;
  void save_fixture(const std::string& hash, const std::string& request,
                    const std::string& response, const std::string& text) const;
  void log(const std::string& request, const HttpResponse& response, int attempt) const;
  void throttle();

  LlmEndpoint endpoint_;
  LlmMode mode_;
  std::optional<std::filesystem::path> fixtures_;
  std::shared_ptr<Transport> transport_;
  std::optional<std::filesystem::path> log_path_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point last_request_{};
};

}  // namespace facexai
