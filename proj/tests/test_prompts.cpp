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
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "grantopic/errors.hpp"
#include "grantopic/hash.hpp"
#include "grantopic/prompts.hpp"
#include "support.hpp"

using namespace grantopic;

namespace {

std::string read_prompt_file(PromptName name) {
  std::ifstream in(std::filesystem::path(GT_PROMPT_DIR) / (std::string(to_string(name)) + ".txt"), std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

// SHA-256 of each canonical template body. Editing a template must update this table.
const std::map<PromptName, std::string> kGolden = {
    {PromptName::summarization, "834311f6579dbd061fbd260901c2b420bb380feae5811ae4a4230d43a695c237"},
    {PromptName::topic_generation, "d9ee18665e4fc398478d1fecec4cd1db0bb2c528de222af3315aa08b68d69f6a"},
    {PromptName::topic_merge, "d18324ffdde3c8f32e48a18f7e7532ceb4e04bbd31eb2f741fb2a07006048db2"},
    {PromptName::topic_assignment, "7dab75d50813c994f3abe756e2fffc2e3939b137c2bf1ed3ca46de8f1a387794"},
    {PromptName::hierarchy, "639344b6722ae61ae94a2149671b8ef495284590cda6d3e250752011e06ad786"},
    {PromptName::auto_label, "0c50a8aaadc12cc97cd5e0374e5c51be22f0cdaf878f328f56a77c29c24bbe75"},
    {PromptName::topic_accuracy_judge, "2a8b2ade25b184406bc6e67f3ae964591c9945326ca1f1191d79a42e64614bb9"},
    {PromptName::topic_completeness_judge, "3dc31e339c5090922f10620bb558b0fbaeaadb5bf8f8c7296fad83b19c247e64"},
    {PromptName::label_accuracy_judge, "b23972c70f9be5615b617558fd1d900ecd1bf0ded303f45b644751fa342b996a"},
};

}  // namespace

TEST_CASE("golden checksums of canonical templates") {
  const auto lib = PromptLibrary::canonical();
  for (auto name : kAllPrompts) {
    CAPTURE(to_string(name));
    CHECK(sha256_hex(lib.get(name).body) == kGolden.at(name));
    CHECK(lib.get(name).body == read_prompt_file(name));
  }
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("required placeholders") {
  const auto lib = PromptLibrary::canonical();
  using S = std::set<std::string, std::less<>>;
  CHECK(lib.get(PromptName::summarization).required_placeholders ==
        S{"domain_description", "topic_description", "topic_definition", "text", "format_instructions"});
  CHECK(lib.get(PromptName::topic_generation).required_placeholders ==
        S{"topic_description", "topic_generation_examples", "topic_definition", "no_topic_option", "document"});
  CHECK(lib.get(PromptName::topic_merge).required_placeholders ==
        S{"topic_merge_examples", "topic_definition", "topic"});
  CHECK(lib.get(PromptName::topic_assignment).required_placeholders == S{"document", "main_topics"});
  CHECK(lib.get(PromptName::hierarchy).required_placeholders == S{"parent_topic_examples", "topics"});
  CHECK(lib.get(PromptName::auto_label).required_placeholders == S{"set_of_words"});
  CHECK(lib.get(PromptName::label_accuracy_judge).invented);
  CHECK_FALSE(lib.get(PromptName::topic_assignment).invented);
}

TEST_CASE("rendering") {
  const auto lib = PromptLibrary::canonical();
  const auto r = lib.render(PromptName::topic_assignment, {{"document", "d"}, {"main_topics", "A\nB"}});
  CHECK(r.find("[Document]\nd\n") != std::string::npos);
  CHECK(r.find("[Main topics]\nA\nB\n") != std::string::npos);
  CHECK(r.find("If no main topic is appropriate, return 'Other'.") != std::string::npos);
  CHECK(r == lib.render(PromptName::topic_assignment, {{"document", "d"}, {"main_topics", "A\nB"}}));
  // values are inserted verbatim, never rescanned
  const auto v = lib.render(PromptName::topic_assignment, {{"document", "{main_topics}"}, {"main_topics", "X"}});
  CHECK(v.find("[Document]\n{main_topics}\n") != std::string::npos);
  try {
    lib.render(PromptName::hierarchy, {{"parent_topic_examples", ""}});
    FAIL("expected missing placeholder");
  } catch (const ValidationError& e) {
    CHECK(e.items() == std::vector<std::string>{"topics"});
  }
  CHECK(placeholders_in("a {x} b {y} {x} {not valid} {}") == std::set<std::string, std::less<>>{"x", "y"});
}

TEST_CASE("template phrases are transcribed verbatim") {
  const auto lib = PromptLibrary::canonical();
  CHECK(lib.get(PromptName::summarization).body.find("Use the following `Summary Guidelines` to generate a summary:") !=
        std::string::npos);
  CHECK(lib.get(PromptName::topic_generation).body.find("Your task is to generate topics within the documents.") !=
        std::string::npos);
  CHECK(lib.get(PromptName::topic_merge).body.find("Return \"None\" if no modification is needed.") !=
        std::string::npos);
  CHECK(lib.get(PromptName::hierarchy).body.find("Your task is to group topics into broad parent topics.") !=
        std::string::npos);
  CHECK(lib.get(PromptName::auto_label).body.find("Generate a human-readable topic") != std::string::npos);
  CHECK(lib.get(PromptName::topic_accuracy_judge)
            .body.find("Incorrect, Partially Correct, Mostly Correct, and Completely Correct.") != std::string::npos);
  CHECK(lib.get(PromptName::topic_completeness_judge)
            .body.find("Not covered, Minorly covered, Mostly covered, and Complete.") != std::string::npos);
}

TEST_CASE("template overrides") {
  gt_test::TempDir dir;
  {
    std::ofstream(dir / "topic_assignment.txt") << "custom {document} / {main_topics}\n";
  }
  const auto lib = PromptLibrary::with_overrides(dir.path);
  CHECK(lib.render(PromptName::topic_assignment, {{"document", "a"}, {"main_topics", "b"}}) == "custom a / b");
  CHECK(lib.get(PromptName::hierarchy).body == PromptLibrary::canonical().get(PromptName::hierarchy).body);
}
