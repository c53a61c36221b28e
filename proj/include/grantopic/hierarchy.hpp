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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "grantopic/context.hpp"
#include "grantopic/model.hpp"

namespace grantopic {

struct HierarchyConfig {
  std::size_t target_cluster_size = 8;
  std::uint64_t seed = 42;
  std::string parent_topic_examples;
};

struct HierarchyResult {
  std::vector<Topic> parents;                    // no parent_id of their own
  std::map<std::string, std::string> child_map;  // child topic id -> parent topic id
};

struct HierarchyOutcome {
  HierarchyResult result;
  TopicModelRun run;  // input run with parents appended and children linked
  std::vector<std::string> warnings;
};

/// Groups the run's granular topics under new parent topics: topic names are embedded and
/// clustered, then each multi-topic cluster gets one parent-topic call. Clusters whose call
/// or answer fails keep their topics top-level and add a warning. Document assignments are
/// left untouched. Any parents already present in the run are replaced.
HierarchyOutcome detect_hierarchy(const TopicModelRun& run, const HierarchyConfig& cfg, const PipelineContext& ctx);

nlohmann::json to_json(const HierarchyResult& h);

}  // namespace grantopic
