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

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "grantopic/model.hpp"

namespace grantopic {

/// Reads a JSONL corpus. Each line: {"id": str, "text": str, "label"?: str, "summary"?: str}.
/// Blank lines are skipped. Throws ParseError (with 1-based line) or DuplicateIdError.
std::vector<Document> load_corpus(const std::filesystem::path& path);

/// Writes documents in the same schema `load_corpus` reads.
void save_corpus(std::span<const Document> docs, const std::filesystem::path& path);

/// Writes topics.json, assignments.jsonl and run.json into `dir` (created if needed).
void save_run(const TopicModelRun& run, const std::filesystem::path& dir);
TopicModelRun load_run(const std::filesystem::path& dir);

nlohmann::json to_json(const Topic& topic);
Topic topic_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TopicAssignment& a);
TopicAssignment assignment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Clustering& c);
Clustering clustering_from_json(const nlohmann::json& j);

/// Writes `text` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);
std::string read_file(const std::filesystem::path& path);

}  // namespace grantopic
