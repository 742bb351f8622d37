#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

namespace trajmap {

enum class ChatRole { System, User, Assistant };

const char* role_name(ChatRole role);

struct ChatMessage {
  ChatRole role = ChatRole::User;
  std::string text;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_output_tokens = 4096;
};

struct TokenUsage {
  long input = 0;
  long output = 0;
};

struct ChatResponse {
  std::string text;
  TokenUsage usage;
};

/// Content-addressed key for a request: SHA-256 over model id, temperature
/// and the serialized message list, in a fixed byte layout so equal requests
/// digest identically on every platform.
struct CacheKey {
  std::string digest;

  static CacheKey of(const ChatRequest& request);
};

/// Rough size estimate used only for the hard context-overflow check.
long estimate_tokens(const ChatRequest& request);

class Transport {
 public:
  virtual ~Transport() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  /// Live transports are subject to the gateway concurrency limit.
  virtual bool is_live() const { return false; }
};

struct RetryPolicy {
  int max_attempts = 3;
  std::vector<std::chrono::milliseconds> delays{std::chrono::milliseconds(1000),
                                                std::chrono::milliseconds(4000),
                                                std::chrono::milliseconds(16000)};
};

/// Talks to an HTTP endpoint speaking the chat-completions wire format:
/// POST {base_url}{path} with {model, messages, temperature, max_tokens}.
/// Retries transport-level failures and 429/5xx with the policy backoff;
/// other HTTP errors fail immediately.
class HttpTransport : public Transport {
 public:
  struct Options {
    std::string base_url;                         // e.g. "http://127.0.0.1:8080"
    std::string path = "/v1/chat/completions";
    std::string bearer_token;                     // empty = no Authorization header
    RetryPolicy retry;
    /// Injected for tests; defaults to this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleeper;
  };

  explicit HttpTransport(Options options);
  ChatResponse complete(const ChatRequest& request) override;
  bool is_live() const override { return true; }

 private:
  Options options_;
};

/// Serves a directory of recorded responses (the cache format), keyed by
/// request digest. A missing entry throws ReplayMiss.
class ReplayTransport : public Transport {
 public:
  explicit ReplayTransport(std::filesystem::path dir);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::filesystem::path dir_;
};

/// Deterministic fake: a responder function maps requests to response text.
/// Used for fixture generation and offline tests.
class ScriptedTransport : public Transport {
 public:
  using Responder = std::function<std::string(const ChatRequest&)>;

  explicit ScriptedTransport(Responder responder);
  ChatResponse complete(const ChatRequest& request) override;
  int calls() const { return calls_; }

 private:
  Responder responder_;
  int calls_ = 0;
};

/// Front door for completions: validates the request, enforces the context
/// limit, consults the response cache, and only then hits the transport.
/// Writes are atomic and single-flight per key, so concurrent callers of an
/// equal request produce one stored value and at most one transport call.
class Gateway {
 public:
  struct Options {
    std::filesystem::path cache_dir;  // empty = caching disabled
    int concurrency = 4;              // in-flight live requests
    long context_token_limit = 128000;
  };

  Gateway(std::shared_ptr<Transport> transport, Options options);

  ChatResponse complete(const ChatRequest& request);

  const Options& options() const { return options_; }

 private:
  std::shared_ptr<Transport> transport_;
  Options options_;
  std::counting_semaphore<256> live_slots_;
  std::mutex flight_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> in_flight_;

  std::shared_ptr<std::mutex> key_mutex(const std::string& digest);
};

/// Cache/replay file helpers, shared by Gateway and ReplayTransport.
namespace cache_file {
std::filesystem::path path_for(const std::filesystem::path& dir, const CacheKey& key);
std::string encode(const ChatRequest& request, const CacheKey& key, const ChatResponse& response);
ChatResponse decode(const std::string& content);  // SchemaError
}  // namespace cache_file

}  // namespace trajmap
