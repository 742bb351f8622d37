#include "trajmap/gateway.hpp"

#include <cstdio>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "trajmap/errors.hpp"
#include "trajmap/serialization.hpp"
#include "trajmap/sha256.hpp"

namespace trajmap {

using nlohmann::json;

const char* role_name(ChatRole role) {
  switch (role) {
    case ChatRole::System:
      return "system";
    case ChatRole::User:
      return "user";
    case ChatRole::Assistant:
      return "assistant";
  }
  return "user";
}

CacheKey CacheKey::of(const ChatRequest& request) {
  // Fixed layout with unit separators; temperature printed with a fixed
  // format so the digest never depends on float-to-string defaults.
  char temp[32];
  std::snprintf(temp, sizeof(temp), "%.6f", request.temperature);
  std::string material;
  material.reserve(256);
  material += request.model_id;
  material += '\x1f';
  material += temp;
  for (const ChatMessage& message : request.messages) {
    material += '\x1e';
    material += role_name(message.role);
    material += '\x1f';
    material += message.text;
  }
  return CacheKey{sha256_hex(material)};
}

long estimate_tokens(const ChatRequest& request) {
  std::size_t bytes = 0;
  for (const ChatMessage& message : request.messages) {
    bytes += message.text.size();
  }
  return static_cast<long>(bytes / 4) + 4 * static_cast<long>(request.messages.size());
}

namespace cache_file {

std::filesystem::path path_for(const std::filesystem::path& dir, const CacheKey& key) {
  return dir / (key.digest + ".json");
}

std::string encode(const ChatRequest& request, const CacheKey& key, const ChatResponse& response) {
  json messages = json::array();
  for (const ChatMessage& message : request.messages) {
    messages.push_back({{"role", role_name(message.role)}, {"content", message.text}});
  }
  json value = {
      {"digest", key.digest},
      {"request",
       {{"model", request.model_id},
        {"temperature", request.temperature},
        {"messages", messages}}},
      {"response",
       {{"text", response.text},
        {"input_tokens", response.usage.input},
        {"output_tokens", response.usage.output}}},
  };
  return dump_json(value);
}

ChatResponse decode(const std::string& content) {
  json value = json::parse(content, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded() || !value.is_object() || !value.contains("response")) {
    throw SchemaError("malformed cache entry");
  }
  const json& resp = value["response"];
  ChatResponse out;
  out.text = resp.value("text", "");
  out.usage.input = resp.value("input_tokens", 0L);
  out.usage.output = resp.value("output_tokens", 0L);
  return out;
}

}  // namespace cache_file

// --- HttpTransport ----------------------------------------------------------

HttpTransport::HttpTransport(Options options) : options_(std::move(options)) {
  if (options_.base_url.empty()) {
    throw ConfigError("HttpTransport needs a base URL");
  }
  if (!options_.sleeper) {
    options_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

ChatResponse HttpTransport::complete(const ChatRequest& request) {
  json messages = json::array();
  for (const ChatMessage& message : request.messages) {
    messages.push_back({{"role", role_name(message.role)}, {"content", message.text}});
  }
  const std::string body = json{{"model", request.model_id},
                                {"messages", messages},
                                {"temperature", request.temperature},
                                {"max_tokens", request.max_output_tokens}}
                               .dump();

  httplib::Headers headers;
  if (!options_.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.bearer_token);
  }

  std::string last_error;
  for (int attempt = 0; attempt < options_.retry.max_attempts; ++attempt) {
    if (attempt > 0) {
      const auto& delays = options_.retry.delays;
      const std::size_t idx = std::min<std::size_t>(attempt - 1, delays.size() - 1);
      options_.sleeper(delays.empty() ? std::chrono::milliseconds(0) : delays[idx]);
    }

    httplib::Client client(options_.base_url);
    client.set_read_timeout(300, 0);
    auto result = client.Post(options_.path, headers, body, "application/json");
    if (!result) {
      last_error = "connection error: " + httplib::to_string(result.error());
      continue;  // transport-level failure: retry
    }
    if (result->status == 429 || result->status >= 500) {
      last_error = "HTTP " + std::to_string(result->status);
      continue;  // rate limit / server error: retry
    }
    if (result->status != 200) {
      throw TransportError("HTTP " + std::to_string(result->status) + ": " + result->body);
    }

    json value = json::parse(result->body, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded() || !value.contains("choices") || value["choices"].empty()) {
      throw TransportError("endpoint returned an unexpected body");
    }
    ChatResponse response;
    response.text = value["choices"][0].value("message", json::object()).value("content", "");
    if (value.contains("usage")) {
      response.usage.input = value["usage"].value("prompt_tokens", 0L);
      response.usage.output = value["usage"].value("completion_tokens", 0L);
    }
    return response;
  }
  throw TransportError("request failed after " + std::to_string(options_.retry.max_attempts) +
                       " attempts; last error: " + last_error);
}

// --- ReplayTransport ---------------------------------------------------------

ReplayTransport::ReplayTransport(std::filesystem::path dir) : dir_(std::move(dir)) {}

ChatResponse ReplayTransport::complete(const ChatRequest& request) {
  const CacheKey key = CacheKey::of(request);
  const std::filesystem::path path = cache_file::path_for(dir_, key);
  if (!std::filesystem::exists(path)) {
    throw ReplayMiss("no replay entry " + key.digest + " under " + dir_.string() +
                     " (model=" + request.model_id +
                     ", messages=" + std::to_string(request.messages.size()) + ")");
  }
  return cache_file::decode(read_file(path));
}

// --- ScriptedTransport -------------------------------------------------------

ScriptedTransport::ScriptedTransport(Responder responder) : responder_(std::move(responder)) {}

ChatResponse ScriptedTransport::complete(const ChatRequest& request) {
  ++calls_;
  ChatResponse response;
  response.text = responder_(request);
  // Deterministic usage numbers so recorded fixtures are stable.
  response.usage.input = estimate_tokens(request);
  response.usage.output = static_cast<long>(response.text.size() / 4);
  return response;
}

// --- Gateway -------------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<Transport> transport, Options options)
    : transport_(std::move(transport)),
      options_(std::move(options)),
      live_slots_(std::max(1, std::min(options_.concurrency, 256))) {
  if (!transport_) {
    throw ConfigError("Gateway needs a transport");
  }
}

std::shared_ptr<std::mutex> Gateway::key_mutex(const std::string& digest) {
  std::lock_guard lock(flight_mutex_);
  auto& slot = in_flight_[digest];
  if (!slot) {
    slot = std::make_shared<std::mutex>();
  }
  return slot;
}

ChatResponse Gateway::complete(const ChatRequest& request) {
  if (request.messages.empty()) {
    throw PreconditionError("chat request has no messages");
  }
  for (const ChatMessage& message : request.messages) {
    if (message.role != ChatRole::System) {
      if (message.role != ChatRole::User) {
        throw PreconditionError("first non-system message must have role user");
      }
      break;
    }
  }
  if (options_.context_token_limit > 0 && estimate_tokens(request) > options_.context_token_limit) {
    throw ContextOverflow("estimated prompt size exceeds the context limit of " +
                          std::to_string(options_.context_token_limit) + " tokens");
  }

  const CacheKey key = CacheKey::of(request);
  const bool caching = !options_.cache_dir.empty();
  const std::filesystem::path path =
      caching ? cache_file::path_for(options_.cache_dir, key) : std::filesystem::path();

  if (caching && std::filesystem::exists(path)) {
    return cache_file::decode(read_file(path));
  }

  auto guard = key_mutex(key.digest);
  std::lock_guard lock(*guard);
  if (caching && std::filesystem::exists(path)) {
    return cache_file::decode(read_file(path));
  }

  ChatResponse response;
  if (transport_->is_live()) {
    live_slots_.acquire();
    try {
      response = transport_->complete(request);
    } catch (...) {
      live_slots_.release();
      throw;
    }
    live_slots_.release();
  } else {
    response = transport_->complete(request);
  }

  if (caching) {
    atomic_write_file(path, cache_file::encode(request, key, response));
  }
  return response;
}

}  // namespace trajmap
