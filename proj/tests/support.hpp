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

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include "grantopic/context.hpp"
#include "grantopic/embedding.hpp"
#include "grantopic/llm_gateway.hpp"
#include "grantopic/prompts.hpp"

namespace gt_test {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(GT_FIXTURE_DIR) / name; }

/// Fresh directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("grantopic-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& s) const { return path / s; }
};

inline grantopic::GatewayOptions fast_options() {
  grantopic::GatewayOptions o;
  o.backoff_base = std::chrono::milliseconds(1);
  return o;
}

/// Gateway, prompts and hashing embedder over a mock script.
struct MockEnv {
  std::shared_ptr<grantopic::MockProvider> mock;
  grantopic::LlmGateway llm;
  grantopic::PromptLibrary prompts = grantopic::PromptLibrary::canonical();
  grantopic::HashingEmbedder embedder{256, 3};
  grantopic::PipelineContext ctx{llm, prompts, embedder};

  explicit MockEnv(const nlohmann::json& script, grantopic::GatewayOptions opts = fast_options())
      : mock(grantopic::MockProvider::from_json(script)), llm(mock, opts) {}
};

}  // namespace gt_test
