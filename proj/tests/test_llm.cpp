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
#include <doctest.h>

#include <cstdlib>
#include <thread>

#include "grantopic/corpus_io.hpp"
#include "grantopic/errors.hpp"
#include "grantopic/llm_gateway.hpp"
#include "grantopic/parallel.hpp"
#include "support.hpp"
#include "local_server.hpp"

using namespace grantopic;
using nlohmann::json;

TEST_CASE("cache keys") {
  LlmRequest a{"m", std::nullopt, "hello", 0.0, 10};
  LlmRequest b = a;
  CHECK(cache_key(a) == cache_key(b));
  CHECK(cache_key(a).size() == 64);
  CHECK(cache_key(a).find_first_not_of("0123456789abcdef") == std::string::npos);
  b.temperature = 0.1;
  CHECK(cache_key(a) != cache_key(b));
  b = a;
  b.system = "";
  CHECK(cache_key(a) != cache_key(b));
  b = a;
  b.max_tokens = 11;
  CHECK(cache_key(a) != cache_key(b));
  b = a;
  b.model = "n";
  CHECK(cache_key(a) != cache_key(b));
}

TEST_CASE("disk cache hit skips the provider") {
  gt_test::TempDir dir;
  auto opts = gt_test::fast_options();
  opts.cache_dir = dir.path;
  gt_test::MockEnv env(json{{"rules", {{{"pattern", "hello (\\w+)"}, {"response", "hi $1"}}}}}, opts);
  auto r1 = env.llm.ask("hello world", CallSite::generation);
  auto r2 = env.llm.ask("hello world", CallSite::generation);
  CHECK(r1.text == "hi world");
  CHECK_FALSE(r1.cached);
  CHECK(r2.text == "hi world");
  CHECK(r2.cached);
  CHECK(env.mock->invocations() == 1);
  CHECK(env.llm.ledger().provider_calls(CallSite::generation) == 1);
  CHECK(env.llm.ledger().cache_hits(CallSite::generation) == 1);
  const auto key = cache_key(env.llm.make_request("hello world"));
  CHECK(std::filesystem::exists(dir.path / key.substr(0, 2) / (key + ".json")));

  // A second gateway over the same directory sees the entry.
  gt_test::MockEnv env2(json{{"rules", json::array()}}, opts);
  CHECK(env2.llm.ask("hello world", CallSite::judge).text == "hi world");
  CHECK(env2.mock->invocations() == 0);

  // refresh bypasses the read.
  auto r3 = env.llm.ask("hello world", CallSite::generation, true);
  CHECK_FALSE(r3.cached);
  CHECK(env.mock->invocations() == 2);

  // A corrupt entry is a miss.
  write_file_atomic(dir.path / key.substr(0, 2) / (key + ".json"), "{not json");
  CHECK_FALSE(env.llm.ask("hello world", CallSite::generation).cached);
}

TEST_CASE("retries") {
  json script = {{"rules",
                  {{{"pattern", "flaky"}, {"response", "ok"}, {"fail_times", 2}},
                   {{"pattern", "dead"}, {"always_fail", true}}}}};
  gt_test::MockEnv env(script);
  CHECK(env.llm.ask("flaky", CallSite::generation).text == "ok");
  CHECK(env.llm.ledger().attempts(CallSite::generation) == 3);
  CHECK(env.llm.ledger().provider_calls(CallSite::generation) == 1);

  auto opts = gt_test::fast_options();
  opts.retries = 2;
  gt_test::MockEnv env2(script, opts);
  try {
    env2.llm.ask("dead", CallSite::assignment);
    FAIL("expected transport error");
  } catch (const TransportError& e) {
    CHECK(std::string(e.what()).find("after 3 attempts") != std::string::npos);
  }
  CHECK(env2.mock->invocations() == 3);
  CHECK(env2.llm.ledger().attempts(CallSite::assignment) == 3);
}

TEST_CASE("provider errors and empty completions") {
  gt_test::MockEnv env(json{{"rules", {{{"pattern", "blank"}, {"response", "  \n"}}}}});
  CHECK_THROWS_AS(env.llm.ask("no rule matches", CallSite::judge), ProviderError);
  CHECK(env.mock->invocations() == 1);  // 404 is not retried
  CHECK_THROWS_AS(env.llm.ask("blank", CallSite::judge), EmptyCompletionError);
  CHECK_THROWS_AS(env.llm.ask("", CallSite::judge), PreconditionError);
}

TEST_CASE("mock scripts") {
  gt_test::MockEnv env(json{{"rules", {{{"pattern", "seq"}, {"responses", {"a", "b"}}}}}, {"default", "fallback"}});
  CHECK(env.llm.ask("seq 1", CallSite::judge).text == "a");
  CHECK(env.llm.ask("seq 2", CallSite::judge).text == "b");
  CHECK(env.llm.ask("seq 3", CallSite::judge).text == "b");
  CHECK(env.llm.ask("other", CallSite::judge).text == "fallback");
  CHECK_THROWS_AS(MockProvider::from_json(json{{"rules", {{{"pattern", "(unclosed"}, {"response", "x"}}}}}),
                  ValidationError);
  CHECK_THROWS_AS(MockProvider::from_json(json{{"rules", "nope"}}), ParseError);
  // long prompts do not exhaust the regex engine
  std::string big(200000, 'x');
  gt_test::MockEnv env2(json{{"rules", {{{"pattern", "(?s)start.*end"}, {"response", "matched"}}}}});
  CHECK(env2.llm.ask("start" + big + "end", CallSite::judge).text == "matched");
}

TEST_CASE("ledger conservation under concurrency") {
  gt_test::TempDir dir;
  auto opts = gt_test::fast_options();
  opts.cache_dir = dir.path;
  opts.max_concurrency = 8;
  gt_test::MockEnv env(json{{"rules", {{{"pattern", "q(\\d+)"}, {"response", "a$1"}}}}}, opts);
  std::vector<std::string> answers(400);
  parallel_for(400, 8, [&](std::size_t i) {
    const auto site = static_cast<CallSite>(i % kCallSiteCount);
    answers[i] = env.llm.ask("q" + std::to_string(i % 50), site).text;
  });
  for (std::size_t i = 0; i < 400; ++i) CHECK(answers[i] == "a" + std::to_string(i % 50));
  const auto& l = env.llm.ledger();
  CHECK(l.total_calls() == 400);
  CHECK(l.total_provider_calls() + l.total_cache_hits() == 400);
  for (std::size_t s = 0; s < kCallSiteCount; ++s) {
    const auto site = static_cast<CallSite>(s);
    CHECK(l.calls(site) == l.provider_calls(site) + l.cache_hits(site));
  }
  CHECK(l.total_provider_calls() >= 50);
}

TEST_CASE("rate limiter spaces calls") {
  auto opts = gt_test::fast_options();
  opts.rate_limit_per_sec = 20;
  gt_test::MockEnv env(json{{"default", "x"}}, opts);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 26; ++i) env.llm.ask("p" + std::to_string(i), CallSite::judge);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  // the bucket holds one second of tokens; the 6 calls beyond it refill at 20/s
  CHECK(elapsed >= std::chrono::milliseconds(290));
}

TEST_CASE("http chat provider against a local endpoint") {
  gt_test::LocalServer srv;
  json seen;
  int calls = 0;
  srv.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    if (++calls == 1) {
      res.status = 503;
      return;
    }
    res.set_content(json{{"choices", {{{"message", {{"content", "pong"}}}}}}}.dump(), "application/json");
  });
  srv.server.Post("/bad", [](const httplib::Request&, httplib::Response& res) { res.status = 400; });
  srv.start();
  LlmGateway gw(std::make_shared<HttpChatProvider>(HttpChatOptions{srv.url("/v1/chat/completions"), "", 5}),
                gt_test::fast_options());
  CHECK(gw.ask("ping", CallSite::generation).text == "pong");
  CHECK(calls == 2);
  CHECK(seen["model"] == "gpt-4o");
  CHECK(seen["messages"][0]["role"] == "user");
  CHECK(seen["messages"][0]["content"] == "ping");
  CHECK(seen["temperature"] == 0.0);
  CHECK(seen["max_tokens"] == 1024);

  LlmGateway bad(std::make_shared<HttpChatProvider>(HttpChatOptions{srv.url("/bad"), "", 5}), gt_test::fast_options());
  try {
    bad.ask("ping", CallSite::generation);
    FAIL("expected provider error");
  } catch (const ProviderError& e) {
    CHECK(e.status() == 400);
  }
  CHECK(bad.ledger().attempts(CallSite::generation) == 1);
}
