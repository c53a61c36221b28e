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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "grantopic/auto_eval.hpp"
#include "grantopic/embedding.hpp"
#include "grantopic/hierarchy.hpp"
#include "grantopic/llm_gateway.hpp"
#include "grantopic/topic_engine.hpp"

namespace grantopic {

struct LlmSettings {
  std::string provider = "http";  // http | mock
  GatewayOptions gateway;
  std::string mock_script;
  HttpChatOptions http{"https://api.openai.com/v1/chat/completions", "OPENAI_API_KEY", 120};
};

struct EmbeddingSettings {
  std::string provider = "hash";  // hash | http
  std::size_t dim = 256;
  std::size_t ngram = 3;
  HttpEmbedderOptions http{"https://api.openai.com/v1/embeddings", "text-embedding-3-small", "OPENAI_API_KEY", 0, 64,
                           60};
};

/// Everything a command needs, resolved from an INI file plus `section.key=value` overrides.
struct RunConfig {
  std::uint64_t seed = 42;
  std::string output_dir;
  std::string prompts_dir;
  LlmSettings llm;
  EmbeddingSettings embedding;
  PipelineConfig pipeline;
  bool include_other_in_export = false;
  HierarchyConfig hierarchy;
  EvalConfig eval;

  /// Resolved values of every key except output locations, grouped by section.
  nlohmann::json snapshot() const;
};

/// Reads `file` (if given), applies `overrides` ("section.key=value" or "key=value" for
/// top-level keys) and validates. Unknown keys and bad values are all reported in one
/// ValidationError. Seeds not set explicitly per section inherit the top-level `seed`.
/// Values may contain "\n" and "\\" escapes.
RunConfig load_config(const std::optional<std::filesystem::path>& file, std::span<const std::string> overrides = {});

/// Every accepted key, "section.key" or bare for top-level keys.
std::vector<std::string> config_keys();

}  // namespace grantopic
