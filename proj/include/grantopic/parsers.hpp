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
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace grantopic {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// True when the whole response is the no-op sentinel None (case-insensitive, optional quotes/period).
bool is_none_response(std::string_view response);

/// Comma/newline separated topic names: trimmed, empties and "None" dropped, order kept,
/// case-insensitive duplicates removed. Throws ResponseFormatError when nothing remains.
std::vector<std::string> parse_topic_list(std::string_view response);

struct MergeDirective {
  std::string name;
  std::vector<std::size_t> indices;  // ascending, unique

  bool operator==(const MergeDirective&) const = default;
};

struct NoChange {
  bool operator==(const NoChange&) const = default;
};

using MergeParse = std::variant<NoChange, std::vector<MergeDirective>>;

/// "None" -> NoChange; otherwise one directive per non-blank line, written `<name>: i, j`
/// or `<name> (i, j)`. Indices must lie in [0, n_topics) and belong to one directive only.
MergeParse parse_merge_directives(std::string_view response, std::size_t n_topics);

using JudgeScale = std::array<std::string_view, 4>;
inline constexpr JudgeScale kAccuracyScale = {"Incorrect", "Partially Correct", "Mostly Correct", "Completely Correct"};
inline constexpr JudgeScale kCompletenessScale = {"Not covered", "Minorly covered", "Mostly covered", "Complete"};

/// 1-based rank of the longest scale name found as a whole phrase (case-insensitive);
/// falls back to a standalone digit 1-4. Throws ResponseFormatError otherwise.
int parse_judge_level(std::string_view response, const JudgeScale& scale);

/// Index of `answer` in `candidates`: exact match after trimming (and dropping one pair of
/// enclosing quotes), then case-insensitive.
std::optional<std::size_t> match_name(std::string_view answer, std::span<const std::string> candidates);

/// Per-document answers in a response whose lines look like `Doc <i>: <text>` (also `<i>: ...`,
/// `<i>. ...`, optionally bulleted). A response that is a single unindexed line applies to every
/// document. Entries for documents the response does not mention are nullopt.
std::vector<std::optional<std::string>> parse_indexed_lines(std::string_view response, std::size_t n_docs);

/// Reads a per-cluster assignment answer. Lines look like `Doc <i>: <topic>` (also `<i>: ...`,
/// `<i>. ...`); a single unindexed line applies to every document. Returns, per document, the
/// index of the chosen topic or nullopt (Other, unknown name, or not mentioned).
std::vector<std::optional<std::size_t>> parse_assignment_response(std::string_view response, std::size_t n_docs,
                                                                  std::span<const std::string> topics);

}  // namespace grantopic
