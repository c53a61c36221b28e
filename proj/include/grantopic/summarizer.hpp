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

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grantopic/llm_gateway.hpp"
#include "grantopic/model.hpp"
#include "grantopic/prompts.hpp"

namespace grantopic {

inline constexpr std::string_view kTruncationMarker = "…[truncated]…";

struct SummarizationConfig {
  std::size_t min_words_to_summarize = 100;
  std::size_t truncate_chars = 48000;
  BusinessDefinition business;

  void validate() const;
};

/// Whitespace-separated token count.
std::size_t word_count(std::string_view text);

/// Keeps the head and tail of `text` around kTruncationMarker so the result has at most
/// `max_bytes` bytes. Cuts fall on UTF-8 code point boundaries. Shorter input is returned as is.
std::string truncate_middle(std::string_view text, std::size_t max_bytes);

/// Texts below the word threshold pass through without an LLM call; longer ones are
/// (truncated and) summarized. `text` is never modified.
Document summarize_document(const Document& doc, const SummarizationConfig& cfg, LlmGateway& llm,
                            const PromptLibrary& prompts);

struct SummarizeOutcome {
  std::vector<Document> documents;  // successes, input order
  std::vector<std::pair<std::string, std::string>> failures;  // (doc id, message)

  /// ValidationError naming every failed document, if any.
  void throw_if_failed() const;
};

SummarizeOutcome summarize_corpus(std::span<const Document> docs, const SummarizationConfig& cfg, LlmGateway& llm,
                                  const PromptLibrary& prompts);

}  // namespace grantopic
