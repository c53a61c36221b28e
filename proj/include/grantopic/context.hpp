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

#include "grantopic/embedding.hpp"
#include "grantopic/llm_gateway.hpp"
#include "grantopic/prompts.hpp"

namespace grantopic {

/// Services every LLM-backed stage needs. Non-owning.
struct PipelineContext {
  LlmGateway& llm;
  const PromptLibrary& prompts;
  EmbeddingProvider& embedder;
};

}  // namespace grantopic
