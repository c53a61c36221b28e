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
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "grantopic/context.hpp"
#include "grantopic/model.hpp"

namespace grantopic {

enum class TopicEmbedding { name, centroid };

struct LabelAccuracyConfig {
  std::size_t n_samples_per_topic = 10;
  std::size_t top_k = 3;
  std::uint64_t seed = 42;
  TopicEmbedding topic_embedding = TopicEmbedding::name;
  bool shuffle_candidates = true;  // false only in tests

  void validate() const;
};

struct TopicLabelAccuracy {
  std::string topic_id;
  std::string name;
  std::size_t sampled = 0;
  std::size_t retained = 0;
  std::size_t missing = 0;
  std::optional<double> accuracy;  // retained / (sampled - missing)
};

struct LabelAccuracyResult {
  std::vector<TopicLabelAccuracy> per_topic;
  std::optional<double> macro;             // unweighted mean of defined per-topic accuracies
  std::vector<std::string> skipped_topics;  // topics without assigned documents
  std::size_t missing_verdicts = 0;
};

/// For every topic with documents: sample documents, present each with the topic and its
/// top-k most similar other topics, and count how often the judge keeps the original.
LabelAccuracyResult label_accuracy(const TopicModelRun& run, std::span<const Document> corpus,
                                   const LabelAccuracyConfig& cfg, const PipelineContext& ctx);

/// 1-4 verdicts; an unparseable answer is re-asked once, then ResponseFormatError.
int judge_topic_accuracy(const std::string& doc_text, const std::string& topic_name,
                         const BusinessDefinition& business, LlmGateway& llm, const PromptLibrary& prompts);
int judge_topic_completeness(const std::string& doc_text, const std::string& topic_name,
                             const BusinessDefinition& business, LlmGateway& llm, const PromptLibrary& prompts);

struct EvalConfig {
  LabelAccuracyConfig label_accuracy;
  std::size_t sample_cap = 1000;
  std::uint64_t seed = 42;
  bool run_label_accuracy = true;
  bool run_judges = true;
  BusinessDefinition business;
};

struct JudgeStats {
  std::array<std::size_t, 4> histogram{};
  std::optional<double> mean;
};

struct TopicJudgeBreakdown {
  std::string name;
  std::size_t n = 0;
  double accuracy_mean = 0;
  double completeness_mean = 0;
};

struct EvalReport {
  std::string label_accuracy_status = "skipped";  // ok | not_applicable | skipped | error
  std::optional<LabelAccuracyResult> label_accuracy;
  std::string judges_status = "skipped";
  JudgeStats topic_accuracy;
  JudgeStats topic_completeness;
  std::size_t n_judged = 0;
  std::size_t missing_verdicts = 0;
  std::map<std::string, TopicJudgeBreakdown> per_topic;  // topic id -> judge means
  std::vector<std::string> errors;
  nlohmann::json config = nlohmann::json::object();
};

/// Label accuracy plus accuracy/completeness judges over a seeded sample of up to
/// `sample_cap` (document, topic) pairs. OTHER documents are never judged.
EvalReport evaluate_run(const TopicModelRun& run, std::span<const Document> corpus, const EvalConfig& cfg,
                        const PipelineContext& ctx);

nlohmann::json to_json(const EvalReport& report);

}  // namespace grantopic
