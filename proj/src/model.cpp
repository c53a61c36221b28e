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
#include "grantopic/model.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "grantopic/errors.hpp"

namespace grantopic {

Clustering::Clustering(std::map<std::string, std::size_t> assignment, std::size_t k)
    : assignment_(std::move(assignment)), k_(k) {
  if (k_ < 1) throw ValidationError("clustering needs k >= 1", {std::to_string(k_)});
  std::vector<std::string> bad;
  for (const auto& [id, c] : assignment_)
    if (c >= k_) bad.push_back(id);
  if (!bad.empty()) throw ValidationError("cluster index out of range [0, k) for documents", bad);
}

Clustering Clustering::from_labels(std::span<const int> labels) {
  std::map<std::string, std::size_t> a;
  std::size_t k = 1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw ValidationError("negative cluster label at", {std::to_string(i)});
    a.emplace(std::to_string(i), static_cast<std::size_t>(labels[i]));
    k = std::max(k, static_cast<std::size_t>(labels[i]) + 1);
  }
  return Clustering(std::move(a), k);
}

std::vector<std::vector<std::string>> Clustering::members() const {
  std::vector<std::vector<std::string>> out(k_);
  for (const auto& [id, c] : assignment_) out[c].push_back(id);
  return out;
}

std::string_view to_string(AssignmentStage stage) {
  switch (stage) {
    case AssignmentStage::generated: return "generated";
    case AssignmentStage::remapped: return "remapped";
    case AssignmentStage::other: return "other";
  }
  return "generated";
}

AssignmentStage stage_from_string(std::string_view s) {
  if (s == "generated") return AssignmentStage::generated;
  if (s == "remapped") return AssignmentStage::remapped;
  if (s == "other") return AssignmentStage::other;
  throw ParseError("unknown assignment stage '" + std::string(s) + "'");
}

const Topic* TopicModelRun::find_topic(std::string_view id) const {
  auto it = std::find_if(topics.begin(), topics.end(), [&](const Topic& t) { return t.id == id; });
  return it == topics.end() ? nullptr : &*it;
}

std::string next_topic_id(const std::vector<Topic>& topics) {
  long long next = 0;
  for (const auto& t : topics) {
    if (t.id.size() < 2 || t.id[0] != 't') continue;
    long long n = 0;
    auto [p, ec] = std::from_chars(t.id.data() + 1, t.id.data() + t.id.size(), n);
    if (ec == std::errc{} && p == t.id.data() + t.id.size()) next = std::max(next, n + 1);
  }
  return "t" + std::to_string(next);
}

void validate_run(const TopicModelRun& run) {
  std::set<std::string> ids;
  std::vector<std::string> bad_topics;
  for (const auto& t : run.topics) {
    if (t.name.empty() || t.id.empty() || t.id == kOther || !ids.insert(t.id).second)
      bad_topics.push_back(t.id);
  }
  for (const auto& t : run.topics) {
    if (!t.parent_id) continue;
    const Topic* parent = run.find_topic(*t.parent_id);
    if (!parent || parent->parent_id || *t.parent_id == t.id) bad_topics.push_back(t.id);
  }
  if (!bad_topics.empty()) throw ValidationError("invalid topics", bad_topics);

  std::set<std::string> docs;
  std::vector<std::string> bad_docs;
  for (const auto& a : run.assignments) {
    if (!docs.insert(a.doc_id).second || (!a.is_other() && !ids.contains(a.topic_id)))
      bad_docs.push_back(a.doc_id);
  }
  if (!bad_docs.empty()) throw ValidationError("unresolved or duplicate assignments for documents", bad_docs);
}

void validate_corpus(std::span<const Document> docs) {
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& d = docs[i];
    if (d.id.empty()) throw ValidationError("empty document id at index", {std::to_string(i)});
    if (d.text.empty()) throw ValidationError("empty document text", {d.id});
    if (!seen.insert(d.id).second) throw DuplicateIdError(d.id);
  }
}

}  // namespace grantopic
