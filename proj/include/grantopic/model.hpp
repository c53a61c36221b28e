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
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace grantopic {

/// Assignment sentinel for documents that fit none of the generated topics.
inline constexpr std::string_view kOther = "Other";

struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> summary;
  std::optional<std::string> gold_label;

  /// Text the pipeline operates on: the summary when present, else the raw text.
  const std::string& working_text() const { return summary ? *summary : text; }

  bool operator==(const Document&) const = default;
};

/// A partition of document ids into `k` clusters indexed [0, k).
class Clustering {
 public:
  Clustering() = default;
  Clustering(std::map<std::string, std::size_t> assignment, std::size_t k);

  /// Cluster indices taken positionally; document ids become "0", "1", ...
  static Clustering from_labels(std::span<const int> labels);

  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return assignment_.size(); }
  const std::map<std::string, std::size_t>& assignment() const noexcept { return assignment_; }
  std::size_t at(const std::string& doc_id) const { return assignment_.at(doc_id); }

  /// Members of each cluster, ids in lexicographic order.
  std::vector<std::vector<std::string>> members() const;

  bool operator==(const Clustering&) const = default;

 private:
  std::map<std::string, std::size_t> assignment_;
  std::size_t k_ = 1;
};

struct Topic {
  std::string id;
  std::string name;
  std::optional<std::size_t> source_cluster;
  std::optional<std::string> parent_id;
  std::vector<std::string> merged_from;

  bool operator==(const Topic&) const = default;
};

enum class AssignmentStage { generated, remapped, other };

std::string_view to_string(AssignmentStage stage);
AssignmentStage stage_from_string(std::string_view s);

struct TopicAssignment {
  std::string doc_id;
  std::string topic_id;  // a topic id or kOther
  AssignmentStage stage = AssignmentStage::generated;

  bool is_other() const { return topic_id == kOther; }
  bool operator==(const TopicAssignment&) const = default;
};

struct BusinessDefinition {
  std::string domain_description;
  std::string topic_description;
  std::string topic_definition;

  bool operator==(const BusinessDefinition&) const = default;
};

struct TopicModelRun {
  std::string run_id;
  nlohmann::json config = nlohmann::json::object();
  std::vector<Topic> topics;
  std::vector<TopicAssignment> assignments;
  Clustering clustering;
  std::int64_t llm_call_count = 0;
  /// Per-stage failures recorded while the run still completed (failed clusters, refinement).
  std::vector<std::string> failures;
  /// Wall-clock data and other non-reproducible facts (timestamps, cache hits, paths).
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t n_topics() const { return topics.size(); }
  const Topic* find_topic(std::string_view id) const;

  bool operator==(const TopicModelRun&) const = default;
};

/// Returns "t<n>" where n is one past the largest numeric suffix among existing "t<n>" ids.
std::string next_topic_id(const std::vector<Topic>& topics);

/// Checks referential integrity of a run. Throws ValidationError listing offending doc ids
/// (unresolved topic ids) or topic ids (bad parent links, empty names).
void validate_run(const TopicModelRun& run);

/// Rejects empty/duplicate ids and empty texts.
void validate_corpus(std::span<const Document> docs);

}  // namespace grantopic
