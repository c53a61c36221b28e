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
#include "grantopic/hierarchy.hpp"

#include <set>

#include "grantopic/corpus_io.hpp"
#include "grantopic/errors.hpp"
#include "grantopic/kmeans.hpp"
#include "grantopic/parallel.hpp"
#include "grantopic/parsers.hpp"

using nlohmann::json;

namespace grantopic {

HierarchyOutcome detect_hierarchy(const TopicModelRun& run, const HierarchyConfig& cfg, const PipelineContext& ctx) {
  std::set<std::string> parent_ids;
  for (const auto& t : run.topics)
    if (t.parent_id) parent_ids.insert(*t.parent_id);
  std::vector<Topic> granular;
  for (const auto& t : run.topics) {
    if (parent_ids.contains(t.id)) continue;
    Topic c = t;
    c.parent_id.reset();
    granular.push_back(std::move(c));
  }
  if (granular.size() < 2)
    throw PreconditionError("hierarchy detection needs at least 2 topics, run has " + std::to_string(granular.size()));

  std::vector<std::string> ids, names;
  for (const auto& t : granular) {
    ids.push_back(t.id);
    names.push_back(t.name);
  }
  KMeansConfig km_cfg;
  km_cfg.target_cluster_size = cfg.target_cluster_size;
  km_cfg.seed = cfg.seed;
  const auto km = kmeans_fit<double>(ids, embed_batch(ctx.embedder, names), km_cfg);

  std::vector<std::vector<std::size_t>> groups(km.clustering.k());
  for (std::size_t i = 0; i < granular.size(); ++i) groups[km.labels[i]].push_back(i);

  struct GroupAnswer {
    std::vector<MergeDirective> directives;
    std::optional<std::string> warning;
  };
  std::vector<GroupAnswer> answers(groups.size());
  parallel_for(groups.size(), ctx.llm.options().max_concurrency, [&](std::size_t g) {
    const auto& members = groups[g];
    if (members.size() < 2) return;
    std::string listing;
    for (std::size_t i = 0; i < members.size(); ++i)
      listing += (i ? "\n[" : "[") + std::to_string(i) + "] " + granular[members[i]].name;
    const auto prompt = ctx.prompts.render(
        PromptName::hierarchy, {{"parent_topic_examples", cfg.parent_topic_examples}, {"topics", listing}});
    try {
      auto parsed = parse_merge_directives(ctx.llm.ask(prompt, CallSite::hierarchy).text, members.size());
      if (auto* d = std::get_if<std::vector<MergeDirective>>(&parsed)) answers[g].directives = std::move(*d);
    } catch (const Error& e) {
      answers[g].warning = "topic cluster " + std::to_string(g) + ": " + e.what();
    }
  });

  HierarchyOutcome out;
  long long next_id = std::stoll(next_topic_id(run.topics).substr(1));
  std::map<std::string, std::size_t> parent_by_name;  // lowercased name -> index in parents
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (answers[g].warning) out.warnings.push_back(*answers[g].warning);
    for (const auto& d : answers[g].directives) {
      auto [it, fresh] = parent_by_name.emplace(to_lower(d.name), out.result.parents.size());
      if (fresh) out.result.parents.push_back(Topic{"t" + std::to_string(next_id++), d.name, std::nullopt, std::nullopt, {}});
      const auto& parent = out.result.parents[it->second];
      for (auto li : d.indices) {
        auto& child = granular[groups[g][li]];
        child.parent_id = parent.id;
        out.result.child_map[child.id] = parent.id;
      }
    }
  }

  out.run = run;
  out.run.topics = granular;
  out.run.topics.insert(out.run.topics.end(), out.result.parents.begin(), out.result.parents.end());
  validate_run(out.run);
  return out;
}

json to_json(const HierarchyResult& h) {
  json parents = json::array();
  for (const auto& p : h.parents) parents.push_back(grantopic::to_json(p));
  return {{"parents", parents}, {"child_map", h.child_map}};
}

}  // namespace grantopic
