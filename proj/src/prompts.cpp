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
#include "grantopic/prompts.hpp"

#include <vector>

#include "grantopic/corpus_io.hpp"
#include "grantopic/errors.hpp"

namespace grantopic {

namespace detail {
const std::map<std::string, std::string>& canonical_prompt_texts();
}

namespace {

bool is_ident_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }

/// Length of the `{ident}` slot starting at body[i], or 0 when there is none.
std::size_t slot_length(std::string_view body, std::size_t i) {
  if (body[i] != '{') return 0;
  std::size_t j = i + 1;
  while (j < body.size() && is_ident_char(body[j])) ++j;
  if (j == i + 1 || j >= body.size() || body[j] != '}') return 0;
  return j - i + 1;
}

PromptTemplate make_template(PromptName name, std::string body) {
  PromptTemplate t{name, std::move(body), {}, name == PromptName::label_accuracy_judge};
  t.required_placeholders = placeholders_in(t.body);
  return t;
}

}  // namespace

std::string_view to_string(PromptName name) {
  switch (name) {
    case PromptName::summarization: return "summarization";
    case PromptName::topic_generation: return "topic_generation";
    case PromptName::topic_merge: return "topic_merge";
    case PromptName::topic_assignment: return "topic_assignment";
    case PromptName::hierarchy: return "hierarchy";
    case PromptName::auto_label: return "auto_label";
    case PromptName::topic_accuracy_judge: return "topic_accuracy_judge";
    case PromptName::topic_completeness_judge: return "topic_completeness_judge";
    case PromptName::label_accuracy_judge: return "label_accuracy_judge";
  }
  return "unknown";
}

std::set<std::string, std::less<>> placeholders_in(std::string_view body) {
  std::set<std::string, std::less<>> out;
  for (std::size_t i = 0; i < body.size(); ++i)
    if (auto len = slot_length(body, i)) {
      out.emplace(body.substr(i + 1, len - 2));
      i += len - 1;
    }
  return out;
}

std::string render(const PromptTemplate& tpl, const Bindings& bindings) {
  std::vector<std::string> missing;
  for (const auto& p : tpl.required_placeholders)
    if (!bindings.contains(p)) missing.push_back(p);
  if (!missing.empty())
    throw ValidationError("unbound placeholder in template '" + std::string(to_string(tpl.name)) + "'", missing);

  std::string out;
  out.reserve(tpl.body.size());
  const std::string_view body = tpl.body;
  for (std::size_t i = 0; i < body.size();) {
    if (auto len = slot_length(body, i)) {
      out += bindings.find(body.substr(i + 1, len - 2))->second;
      i += len;
    } else {
      out += body[i++];
    }
  }
  return out;
}

PromptLibrary PromptLibrary::canonical() {
  PromptLibrary lib;
  const auto& texts = detail::canonical_prompt_texts();
  for (auto name : kAllPrompts) {
    auto it = texts.find(std::string(to_string(name)));
    if (it == texts.end()) throw Error("canonical prompt '" + std::string(to_string(name)) + "' missing from build");
    lib.templates_.emplace(name, make_template(name, it->second));
  }
  return lib;
}

PromptLibrary PromptLibrary::with_overrides(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("prompts directory '" + dir.string() + "' does not exist");
  PromptLibrary lib = canonical();
  for (auto name : kAllPrompts) {
    const auto p = dir / (std::string(to_string(name)) + ".txt");
    if (!std::filesystem::exists(p)) continue;
    std::string body = read_file(p);
    if (!body.empty() && body.back() == '\n') body.pop_back();
    lib.templates_.insert_or_assign(name, make_template(name, std::move(body)));
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(PromptName name) const { return templates_.at(name); }

std::string PromptLibrary::render(PromptName name, const Bindings& bindings) const {
  return grantopic::render(get(name), bindings);
}

}  // namespace grantopic
