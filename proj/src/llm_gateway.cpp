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
#include "grantopic/llm_gateway.hpp"

#include <cmath>
#include <thread>

#include "grantopic/corpus_io.hpp"
#include "grantopic/errors.hpp"
#include "grantopic/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace grantopic {

std::string_view to_string(CallSite site) {
  switch (site) {
    case CallSite::summarization: return "summarization";
    case CallSite::generation: return "generation";
    case CallSite::assignment: return "assignment";
    case CallSite::refinement: return "refinement";
    case CallSite::hierarchy: return "hierarchy";
    case CallSite::judge: return "judge";
    case CallSite::labeling: return "labeling";
  }
  return "unknown";
}

std::string cache_key(const LlmRequest& req) {
  json j = {{"model", req.model},
            {"system", req.system ? json(*req.system) : json(nullptr)},
            {"user", req.user},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens}};
  return sha256_hex(j.dump());
}

// CallLedger

void CallLedger::record_call(CallSite site, bool cached) {
  auto& c = sites_[static_cast<std::size_t>(site)];
  (cached ? c.cache_hits : c.provider_calls).fetch_add(1);
}

void CallLedger::record_attempt(CallSite site) { sites_[static_cast<std::size_t>(site)].attempts.fetch_add(1); }

std::int64_t CallLedger::calls(CallSite site) const { return provider_calls(site) + cache_hits(site); }
std::int64_t CallLedger::provider_calls(CallSite site) const {
  return sites_[static_cast<std::size_t>(site)].provider_calls.load();
}
std::int64_t CallLedger::cache_hits(CallSite site) const {
  return sites_[static_cast<std::size_t>(site)].cache_hits.load();
}
std::int64_t CallLedger::attempts(CallSite site) const { return sites_[static_cast<std::size_t>(site)].attempts.load(); }

std::int64_t CallLedger::total_calls() const { return total_provider_calls() + total_cache_hits(); }
std::int64_t CallLedger::total_provider_calls() const {
  std::int64_t s = 0;
  for (const auto& c : sites_) s += c.provider_calls.load();
  return s;
}
std::int64_t CallLedger::total_cache_hits() const {
  std::int64_t s = 0;
  for (const auto& c : sites_) s += c.cache_hits.load();
  return s;
}

json CallLedger::to_json() const {
  json j = json::object();
  for (std::size_t i = 0; i < kCallSiteCount; ++i) {
    const auto site = static_cast<CallSite>(i);
    j[std::string(grantopic::to_string(site))] = {{"calls", calls(site)},
                                                   {"provider_calls", provider_calls(site)},
                                                   {"cache_hits", cache_hits(site)},
                                                   {"attempts", attempts(site)}};
  }
  return j;
}

json CallLedger::calls_json() const {
  json j = json::object();
  for (std::size_t i = 0; i < kCallSiteCount; ++i) {
    const auto site = static_cast<CallSite>(i);
    if (calls(site) > 0) j[std::string(grantopic::to_string(site))] = calls(site);
  }
  return j;
}

// LlmGateway

LlmGateway::LlmGateway(std::shared_ptr<LlmProvider> provider, GatewayOptions opts)
    : provider_(std::move(provider)),
      opts_(std::move(opts)),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, opts_.max_concurrency))),
      tokens_(std::max(1.0, opts_.rate_limit_per_sec)),
      last_refill_(std::chrono::steady_clock::now()) {
  if (!provider_) throw PreconditionError("LLM gateway needs a provider");
  if (opts_.retries < 0) throw PreconditionError("llm.retries must be >= 0");
}

LlmRequest LlmGateway::make_request(std::string prompt) const {
  LlmRequest r;
  r.model = opts_.model;
  r.user = std::move(prompt);
  r.temperature = opts_.temperature;
  r.max_tokens = opts_.max_tokens;
  return r;
}

LlmResponse LlmGateway::ask(std::string prompt, CallSite site, bool refresh) {
  return complete(make_request(std::move(prompt)), site, refresh);
}

std::optional<std::string> LlmGateway::cache_read(const std::string& key) const {
  if (!opts_.cache_dir) return std::nullopt;
  const fs::path p = *opts_.cache_dir / key.substr(0, 2) / (key + ".json");
  std::error_code ec;
  if (!fs::exists(p, ec)) return std::nullopt;
  try {
    json j = json::parse(read_file(p));
    if (j.value("key", "") != key) return std::nullopt;
    return j.at("text").get<std::string>();
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable entries are treated as misses and rewritten
  }
}

void LlmGateway::cache_write(const std::string& key, const LlmRequest& req, const std::string& text) const {
  if (!opts_.cache_dir) return;
  json j = {{"key", key},
            {"request", {{"model", req.model},
                         {"prompt_sha256", sha256_hex(req.user)},
                         {"temperature", req.temperature},
                         {"max_tokens", req.max_tokens}}},
            {"text", text}};
  write_file_atomic(*opts_.cache_dir / key.substr(0, 2) / (key + ".json"), j.dump(2) + "\n");
}

void LlmGateway::throttle() {
  if (opts_.rate_limit_per_sec <= 0) return;
  const double capacity = std::max(1.0, opts_.rate_limit_per_sec);
  for (;;) {
    std::chrono::duration<double> wait{};
    {
      std::lock_guard lock(bucket_mu_);
      const auto now = std::chrono::steady_clock::now();
      tokens_ = std::min(capacity, tokens_ + std::chrono::duration<double>(now - last_refill_).count() *
                                                 opts_.rate_limit_per_sec);
      last_refill_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / opts_.rate_limit_per_sec);
    }
    std::this_thread::sleep_for(wait);
  }
}

LlmResponse LlmGateway::complete(const LlmRequest& req, CallSite site, bool refresh) {
  if (req.user.empty()) throw PreconditionError("LLM request with empty prompt");
  const auto start = std::chrono::steady_clock::now();
  const std::string key = cache_key(req);
  if (!refresh) {
    if (auto hit = cache_read(key)) {
      ledger_.record_call(site, true);
      return {*hit, true, 0};
    }
  }
  ledger_.record_call(site, false);

  std::string text;
  const int attempts = 1 + opts_.retries;
  for (int attempt = 1;; ++attempt) {
    ledger_.record_attempt(site);
    try {
      throttle();
      in_flight_.acquire();
      struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
      } release{in_flight_};
      text = provider_->complete(req);
      break;
    } catch (const ProviderError& e) {
      const bool retryable = e.status() == 429 || e.status() >= 500;
      if (!retryable || attempt >= attempts) throw;
    } catch (const TransportError& e) {
      if (attempt >= attempts)
        throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempts) + " attempts)");
    }
    const auto delay = opts_.backoff_base * (1LL << std::min(attempt - 1, 16));
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
  }
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw EmptyCompletionError(std::string("empty completion at site '") + std::string(to_string(site)) + "'");

  cache_write(key, req, text);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  return {text, false, ms.count()};
}

}  // namespace grantopic
