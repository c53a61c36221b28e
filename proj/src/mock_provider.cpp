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
#include <mutex>

#include <boost/regex.hpp>

#include "grantopic/corpus_io.hpp"
#include "grantopic/errors.hpp"
#include "grantopic/llm_gateway.hpp"

using nlohmann::json;

namespace grantopic {

struct MockProvider::Impl {
  struct CompiledRule {
    MockRule rule;
    boost::regex re;
    std::size_t hits = 0;
  };
  std::vector<CompiledRule> rules;
  std::optional<std::string> fallback;
  std::mutex mu;
};

MockProvider::MockProvider(std::vector<MockRule> rules, std::optional<std::string> fallback)
    : impl_(std::make_unique<Impl>()) {
  for (auto& r : rules) {
    if (r.responses.empty() && !r.always_fail)
      throw ValidationError("mock rule without response", {r.pattern});
    boost::regex re;
    try {
      re.assign(r.pattern, boost::regex::perl);
    } catch (const boost::regex_error& e) {
      throw ValidationError(std::string("invalid mock pattern (") + e.what() + ")", {r.pattern});
    }
    impl_->rules.push_back({std::move(r), std::move(re), 0});
  }
  impl_->fallback = std::move(fallback);
}

MockProvider::~MockProvider() = default;

std::shared_ptr<MockProvider> MockProvider::from_json(const json& script) {
  std::vector<MockRule> rules;
  try {
    for (const auto& r : script.value("rules", json::array())) {
      MockRule rule;
      rule.pattern = r.at("pattern").get<std::string>();
      if (r.contains("response")) rule.responses.push_back(r["response"].get<std::string>());
      if (r.contains("responses")) {
        for (const auto& s : r["responses"]) rule.responses.push_back(s.get<std::string>());
      }
      rule.fail_times = r.value("fail_times", 0);
      rule.always_fail = r.value("always_fail", false);
      rules.push_back(std::move(rule));
    }
    std::optional<std::string> fallback;
    if (script.contains("default")) fallback = script["default"].get<std::string>();
    return std::make_shared<MockProvider>(std::move(rules), std::move(fallback));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed mock script: ") + e.what());
  }
}

std::shared_ptr<MockProvider> MockProvider::from_file(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("mock script '" + path.string() + "': " + e.what());
  }
  return from_json(j);
}

std::string MockProvider::complete(const LlmRequest& req) {
  invocations_.fetch_add(1);
  std::lock_guard lock(impl_->mu);
  for (auto& c : impl_->rules) {
    boost::smatch m;
    if (!boost::regex_search(req.user, m, c.re)) continue;
    const std::size_t hit = c.hits++;
    if (c.rule.always_fail || hit < static_cast<std::size_t>(c.rule.fail_times))
      throw TransportError("mock: scripted failure for pattern '" + c.rule.pattern + "'");
    const std::size_t served = hit - static_cast<std::size_t>(c.rule.fail_times);
    const auto& tpl = c.rule.responses[std::min(served, c.rule.responses.size() - 1)];
    return m.format(tpl, boost::format_perl);
  }
  if (impl_->fallback) return *impl_->fallback;
  throw ProviderError(404, "mock: no rule matched the prompt");
}

}  // namespace grantopic
