/*
 * Copyright 2026 The grantopic Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

#include <json.hpp>

namespace grantopic {

enum class CallSite { summarization, generation, assignment, refinement, hierarchy, judge, labeling };
inline constexpr std::size_t kCallSiteCount = 7;

std::string_view to_string(CallSite site);

struct LlmRequest {
  std::string model;
  std::optional<std::string> system;
  std::string user;
  double temperature = 0.0;
  int max_tokens = 1024;
};

struct LlmResponse {
  std::string text;
  bool cached = false;
  std::int64_t latency_ms = 0;
};

/// Hex SHA-256 over every request field; equal requests give equal keys.
std::string cache_key(const LlmRequest& req);

/// A completion backend. Throws TransportError for network-level failures and
/// ProviderError for non-success statuses; both may be retried by the gateway.
class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual std::string name() const = 0;
  virtual std::string complete(const LlmRequest& req) = 0;
};

/// Per-site counters. calls = provider_calls + cache_hits, per site and in total.
class CallLedger {
 public:
  void record_call(CallSite site, bool cached);
  void record_attempt(CallSite site);

  std::int64_t calls(CallSite site) const;
  std::int64_t provider_calls(CallSite site) const;
  std::int64_t cache_hits(CallSite site) const;
  std::int64_t attempts(CallSite site) const;
  std::int64_t total_calls() const;
  std::int64_t total_provider_calls() const;
  std::int64_t total_cache_hits() const;

  /// {"<site>": {"calls", "provider_calls", "cache_hits", "attempts"}, ...}
  nlohmann::json to_json() const;
  /// {"<site>": calls} for sites with at least one call.
  nlohmann::json calls_json() const;

 private:
  struct Counters {
    std::atomic<std::int64_t> provider_calls{0};
    std::atomic<std::int64_t> cache_hits{0};
    std::atomic<std::int64_t> attempts{0};
  };
  std::array<Counters, kCallSiteCount> sites_;
};

struct GatewayOptions {
  std::string model = "gpt-4o";
  double temperature = 0.0;
  int max_tokens = 1024;
  int retries = 3;
  std::chrono::milliseconds backoff_base{500};
  std::size_t max_concurrency = 4;
  double rate_limit_per_sec = 0;  // 0 disables the limiter
  std::optional<std::filesystem::path> cache_dir;
};

/// Cached, retrying, rate-limited access to an LlmProvider. Safe for concurrent use.
class LlmGateway {
 public:
  LlmGateway(std::shared_ptr<LlmProvider> provider, GatewayOptions opts);

  /// A cache hit returns without touching the provider. A miss calls the provider up to
  /// 1 + retries times with exponential backoff and stores the text. `refresh` skips the
  /// cache lookup (used for re-asking after an unusable answer) but still writes.
  LlmResponse complete(const LlmRequest& req, CallSite site, bool refresh = false);

  /// Request built from the gateway defaults.
  LlmResponse ask(std::string prompt, CallSite site, bool refresh = false);

  LlmRequest make_request(std::string prompt) const;

  const CallLedger& ledger() const { return ledger_; }
  const GatewayOptions& options() const { return opts_; }
  const LlmProvider& provider() const { return *provider_; }

 private:
  std::optional<std::string> cache_read(const std::string& key) const;
  void cache_write(const std::string& key, const LlmRequest& req, const std::string& text) const;
  void throttle();

  std::shared_ptr<LlmProvider> provider_;
  GatewayOptions opts_;
  CallLedger ledger_;
  std::counting_semaphore<> in_flight_;
  std::mutex bucket_mu_;
  double tokens_ = 0;
  std::chrono::steady_clock::time_point last_refill_;
};

/// One scripted behaviour of the mock provider.
struct MockRule {
  std::string pattern;                 // Perl regex searched in the user prompt
  std::vector<std::string> responses;  // served in order, last one repeats; "$1" etc. expand captures
  int fail_times = 0;                  // first N matches raise TransportError
  bool always_fail = false;
};

/// Offline provider mapping regex-over-prompt to canned responses.
///
/// Script JSON: {"rules": [{"pattern": str, "response": str | "responses": [str],
/// "fail_times"?: int, "always_fail"?: bool}], "default"?: str}. The first matching
/// rule wins; without a match the default is returned, or a ProviderError(404) raised.
class MockProvider final : public LlmProvider {
 public:
  MockProvider(std::vector<MockRule> rules, std::optional<std::string> fallback);
  ~MockProvider() override;
  static std::shared_ptr<MockProvider> from_json(const nlohmann::json& script);
  static std::shared_ptr<MockProvider> from_file(const std::filesystem::path& path);

  std::string name() const override { return "mock"; }
  std::string complete(const LlmRequest& req) override;

  /// Number of provider invocations, including scripted failures.
  std::int64_t invocations() const { return invocations_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<std::int64_t> invocations_{0};
};

struct HttpChatOptions {
  std::string base_url;     // full endpoint, e.g. "https://api.openai.com/v1/chat/completions"
  std::string api_key_env;  // env var holding the bearer token; empty for none
  int timeout_s = 120;
};

/// Chat-completions endpoint: {"model", "messages", "temperature", "max_tokens"} -> choices[0].message.content.
class HttpChatProvider final : public LlmProvider {
 public:
  explicit HttpChatProvider(HttpChatOptions opts);
  std::string name() const override { return "http"; }
  std::string complete(const LlmRequest& req) override;

 private:
  HttpChatOptions opts_;
};

}  // namespace grantopic
