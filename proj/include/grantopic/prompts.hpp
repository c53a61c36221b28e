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
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace grantopic {

enum class PromptName {
  summarization,
  topic_generation,
  topic_merge,
  topic_assignment,
  hierarchy,
  auto_label,
  topic_accuracy_judge,
  topic_completeness_judge,
  label_accuracy_judge,
};

inline constexpr std::array kAllPrompts = {
    PromptName::summarization,        PromptName::topic_generation,         PromptName::topic_merge,
    PromptName::topic_assignment,     PromptName::hierarchy,                PromptName::auto_label,
    PromptName::topic_accuracy_judge, PromptName::topic_completeness_judge, PromptName::label_accuracy_judge,
};

std::string_view to_string(PromptName name);

/// Binding for the summarization prompt's {format_instructions} slot.
inline constexpr std::string_view kFormatInstructions = "Respond with the summary text only, no preamble.";
/// Binding for the generation prompt's {no_topic_option} slot.
inline constexpr std::string_view kNoTopicOption = "If the document contains no identifiable topic, output: None.";

using Bindings = std::map<std::string, std::string, std::less<>>;

struct PromptTemplate {
  PromptName name;
  std::string body;
  std::set<std::string, std::less<>> required_placeholders;
  /// True for templates this project defines itself rather than reproducing a published one.
  bool invented = false;
};

/// `{identifier}` slots in order of first appearance, deduplicated.
std::set<std::string, std::less<>> placeholders_in(std::string_view body);

/// Substitutes every `{name}` slot in one pass; bound values are inserted verbatim and
/// never rescanned. Throws ValidationError naming unbound placeholders.
std::string render(const PromptTemplate& tpl, const Bindings& bindings);

/// The set of templates used by a run.
class PromptLibrary {
 public:
  /// Templates compiled into the library.
  static PromptLibrary canonical();
  /// Canonical templates, with `<dir>/<name>.txt` replacing any that exist there.
  static PromptLibrary with_overrides(const std::filesystem::path& dir);

  const PromptTemplate& get(PromptName name) const;
  std::string render(PromptName name, const Bindings& bindings) const;

 private:
  std::map<PromptName, PromptTemplate> templates_;
};

}  // namespace grantopic
