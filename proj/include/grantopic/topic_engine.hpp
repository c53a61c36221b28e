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

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "grantopic/context.hpp"
#include "grantopic/kmeans.hpp"
#include "grantopic/model.hpp"
#include "grantopic/summarizer.hpp"

namespace grantopic {

struct RefinementConfig {
  std::size_t min_topic_size = 3;  // topics with fewer documents are listed first in the merge prompt
  std::size_t max_merge_rounds = 2;

  void validate() const;
};

struct EngineConfig {
  RefinementConfig refinement;
  bool combined_call = false;      // one call per cluster that both names topics and assigns documents
  bool global_assignment = false;  // assign against every cluster's topics instead of the cluster's own
  std::size_t max_doc_chars = 1500;
  std::string topic_generation_examples;
  std::string topic_merge_examples;
};

struct PipelineConfig {
  bool summarize = false;
  SummarizationConfig summarization;
  KMeansConfig clustering;
  EngineConfig engine;
  BusinessDefinition business;
  /// Resolved configuration recorded verbatim in run.json.
  nlohmann::json snapshot = nlohmann::json::object();
};

struct ClusterGenerationResult {
  std::size_t cluster_index = 0;
  std::vector<std::string> topics;
  std::map<std::string, std::string> doc_topic_map;  // doc id -> topic name or kOther
  bool failed = false;
  std::string failure;
};

/// Names the topics of one cluster (one generation call, one re-ask on an unusable answer).
/// A "None" answer yields no topics.
std::vector<std::string> generate_cluster_topics(std::span<const Document> docs, const BusinessDefinition& business,
                                                 const EngineConfig& cfg, LlmGateway& llm,
                                                 const PromptLibrary& prompts);

/// Maps every document of a cluster onto `candidates` or kOther with one assignment call.
std::map<std::string, std::string> assign_cluster(std::span<const Document> docs,
                                                  std::span<const std::string> candidates, const EngineConfig& cfg,
                                                  LlmGateway& llm, const PromptLibrary& prompts);

/// Generation then assignment for one cluster. LLM or parse failures mark the result failed
/// and send every document to kOther instead of throwing.
ClusterGenerationResult generate_and_assign_cluster(std::span<const Document> docs,
                                                    const BusinessDefinition& business, std::size_t cluster_index,
                                                    const EngineConfig& cfg, LlmGateway& llm,
                                                    const PromptLibrary& prompts);

struct RefineOutcome {
  std::vector<Topic> topics;
  std::vector<TopicAssignment> assignments;
  std::size_t rounds = 0;  // merge calls issued
  std::vector<std::string> failures;
};

/// Merges paraphrased topics with the merge prompt, one call per round, until the model
/// answers None or `max_merge_rounds` is reached. Each directive replaces its source topics
/// with a new topic and remaps their documents. Unusable answers end refinement with the
/// state of the last completed round.
RefineOutcome refine_topics(std::vector<Topic> topics, std::vector<TopicAssignment> assignments,
                            const RefinementConfig& cfg, const BusinessDefinition& business,
                            const std::string& merge_examples, LlmGateway& llm, const PromptLibrary& prompts);

struct RunPlan {
  std::size_t n_docs = 0;
  std::size_t k = 0;
  std::size_t summarization_calls = 0;  // upper bound
  std::size_t core_call_budget = 0;     // calls_per_cluster * k + max_merge_rounds
};

/// Cluster count and LLM call budget of a run, without calling any model.
RunPlan plan_run(std::span<const Document> corpus, const PipelineConfig& cfg);

/// summarize (optional) -> embed -> k-means -> per-cluster generation and assignment -> refinement.
/// Clusters that fail are recorded in `failures`; throws only when every cluster failed.
TopicModelRun run_topic_modeling(std::span<const Document> corpus, const PipelineConfig& cfg,
                                 const PipelineContext& ctx);

/// Writes {doc_id, text, label} JSONL rows and labels.json (next to `path`) for classifier
/// training. OTHER rows are skipped unless `include_other`. Returns the number of rows.
std::size_t distill_export(const TopicModelRun& run, std::span<const Document> corpus,
                           const std::filesystem::path& path, bool include_other);

}  // namespace grantopic
