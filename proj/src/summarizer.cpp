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
#include "grantopic/summarizer.hpp"

#include <cctype>
#include <optional>

#include "grantopic/errors.hpp"
#include "grantopic/parallel.hpp"
#include "grantopic/parsers.hpp"

namespace grantopic {
namespace {

bool is_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

}  // namespace

void SummarizationConfig::validate() const {
  std::vector<std::string> bad;
  if (min_words_to_summarize < 1) bad.push_back("summarize.min_words");
  if (truncate_chars < 1000) bad.push_back("summarize.truncate_chars");
  if (!bad.empty()) throw ValidationError("invalid summarization configuration", bad);
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

std::string truncate_middle(std::string_view text, std::size_t max_bytes) {
  if (text.size() <= max_bytes) return std::string(text);
  if (max_bytes <= kTruncationMarker.size()) throw PreconditionError("truncation budget smaller than the marker");
  const std::size_t budget = max_bytes - kTruncationMarker.size();
  std::size_t head = budget / 2 + budget % 2;
  std::size_t tail_start = text.size() - budget / 2;
  while (head > 0 && is_continuation(text[head])) --head;
  while (tail_start < text.size() && is_continuation(text[tail_start])) ++tail_start;
  std::string out(text.substr(0, head));
  out += kTruncationMarker;
  out += text.substr(tail_start);
  return out;
}

Document summarize_document(const Document& doc, const SummarizationConfig& cfg, LlmGateway& llm,
                            const PromptLibrary& prompts) {
  if (doc.text.empty()) throw PreconditionError("document '" + doc.id + "' has empty text");
  Document out = doc;
  if (word_count(doc.text) < cfg.min_words_to_summarize) {
    out.summary = doc.text;
    return out;
  }
  const std::string prompt = prompts.render(PromptName::summarization,
                                            {{"domain_description", cfg.business.domain_description},
                                             {"topic_description", cfg.business.topic_description},
                                             {"topic_definition", cfg.business.topic_definition},
                                             {"text", truncate_middle(doc.text, cfg.truncate_chars)},
                                             {"format_instructions", std::string(kFormatInstructions)}});
  std::string summary;
  try {
    summary = trim(llm.ask(prompt, CallSite::summarization).text);
  } catch (const EmptyCompletionError&) {
    throw EmptyCompletionError("empty summary for document '" + doc.id + "'");
  } catch (const Error& e) {
    throw Error("summarization of document '" + doc.id + "' failed: " + e.what());
  }
  if (summary.empty()) throw EmptyCompletionError("empty summary for document '" + doc.id + "'");
  out.summary = std::move(summary);
  return out;
}

void SummarizeOutcome::throw_if_failed() const {
  if (failures.empty()) return;
  std::vector<std::string> ids;
  for (const auto& [id, _] : failures) ids.push_back(id);
  throw ValidationError("summarization failed for documents", ids);
}

SummarizeOutcome summarize_corpus(std::span<const Document> docs, const SummarizationConfig& cfg, LlmGateway& llm,
                                  const PromptLibrary& prompts) {
  cfg.validate();
  std::vector<std::optional<Document>> results(docs.size());
  std::vector<std::string> errors(docs.size());
  parallel_for(docs.size(), llm.options().max_concurrency, [&](std::size_t i) {
    try {
      results[i] = summarize_document(docs[i], cfg, llm, prompts);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  SummarizeOutcome out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (results[i]) out.documents.push_back(std::move(*results[i]));
    else out.failures.emplace_back(docs[i].id, errors[i]);
  }
  return out;
}

}  // namespace grantopic
