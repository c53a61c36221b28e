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

#include "grantopic/errors.hpp"
#include "grantopic/hierarchy.hpp"
#include "support.hpp"

using namespace grantopic;
using nlohmann::json;

namespace {

TopicModelRun run_with(std::vector<std::string> names) {
  TopicModelRun run;
  for (std::size_t i = 0; i < names.size(); ++i) {
    run.topics.push_back({"t" + std::to_string(i), names[i], i, {}, {}});
    run.assignments.push_back({"d" + std::to_string(i), "t" + std::to_string(i), AssignmentStage::generated});
  }
  return run;
}

json answer(const std::string& text) {
  return {{"rules", {{{"pattern", "group topics into broad parent topics"}, {"response", text}}}}};
}

}  // namespace

TEST_CASE("two refund topics share a parent") {
  gt_test::MockEnv env(answer("Refund request: 0, 1"));
  const auto run = run_with({"Request for overdraft fee refund", "Request for late fee refund"});
  const auto out = detect_hierarchy(run, HierarchyConfig{}, env.ctx);
  REQUIRE(out.result.parents.size() == 1);
  const auto& p = out.result.parents[0];
  CHECK(p.name == "Refund request");
  CHECK(p.id == "t2");
  CHECK_FALSE(p.parent_id);
  CHECK(out.result.child_map.at("t0") == "t2");
  CHECK(out.result.child_map.at("t1") == "t2");
  CHECK(out.run.topics.size() == 3);
  CHECK(out.run.topics[0].parent_id == std::optional<std::string>("t2"));
  CHECK(out.run.assignments == run.assignments);
  CHECK(out.warnings.empty());
  CHECK(env.llm.ledger().calls(CallSite::hierarchy) == 1);

  const auto j = to_json(out.result);
  CHECK(j["child_map"]["t0"] == "t2");
  CHECK(j["parents"].size() == 1);

  // rerunning replaces the parents instead of stacking them
  const auto again = detect_hierarchy(out.run, HierarchyConfig{}, env.ctx);
  CHECK(again.run.topics.size() == 3);
  CHECK(again.result.parents[0].id == "t3");
}

TEST_CASE("a single topic is a precondition error") {
  gt_test::MockEnv env(answer("X: 0"));
  CHECK_THROWS_AS(detect_hierarchy(run_with({"Only"}), HierarchyConfig{}, env.ctx), PreconditionError);
  CHECK(env.llm.ledger().total_calls() == 0);
}

TEST_CASE("bad answers leave topics top level with a warning") {
  gt_test::MockEnv env(answer("Refund request: 0, 5"));
  const auto out = detect_hierarchy(run_with({"A refund", "B refund"}), HierarchyConfig{}, env.ctx);
  CHECK(out.result.parents.empty());
  CHECK(out.warnings.size() == 1);
  for (const auto& t : out.run.topics) CHECK_FALSE(t.parent_id);

  gt_test::MockEnv dead(json{{"rules", {{{"pattern", "parent"}, {"always_fail", true}}}}});
  const auto d = detect_hierarchy(run_with({"A refund", "B refund"}), HierarchyConfig{}, dead.ctx);
  CHECK(d.result.parents.empty());
  CHECK(d.warnings.size() == 1);
}

TEST_CASE("None leaves the run flat") {
  gt_test::MockEnv env(answer("None"));
  const auto out = detect_hierarchy(run_with({"A refund", "B refund", "C refund"}), HierarchyConfig{}, env.ctx);
  CHECK(out.result.parents.empty());
  CHECK(out.warnings.empty());
  CHECK(out.run.topics.size() == 3);
}
