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
#include "grantopic/topic_engine.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include "grantopic/corpus_io.hpp"
#include "grantopic/errors.hpp"
#include "grantopic/hash.hpp"
#include "grantopic/parallel.hpp"
#include "grantopic/parsers.hpp"

using nlohmann::json;

namespace grantopic {
namespace {

constexpr std::string_view kPerDocFormat = "Return one line per document in the form `Doc <i>: <main topic>`.";
constexpr std::string_view kCombinedFormat =
    "Return one line per document in the form `Doc <i>: <topic>`; use the same wording for documents that share a "
    "topic.";

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string clip(const std::string& text, std::size_t max_chars) {
  if (text.size() <= max_chars) return text;
  std::size_t cut = max_chars;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  return text.substr(0, cut);
}

std::string render_docs(std::span<const Document> docs, std::size_t max_chars) {
  std::string out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (i) out += '\n';
    out += "Doc " + std::to_string(i) + ": " + clip(docs[i].working_text(), max_chars);
  }
  return out;
}

std::string join_lines(std::span<const std::string> items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "\n" : "") + items[i];
  return out;
}

std::string generation_prompt(std::span<const Document> docs, const BusinessDefinition& business,
                              const EngineConfig& cfg, const PromptLibrary& prompts, bool combined) {
  std::string document = render_docs(docs, cfg.max_doc_chars);
  if (combined) document += "\n\n" + std::string(kCombinedFormat);
  return prompts.render(PromptName::topic_generation, {{"topic_description", business.topic_description},
                                                       {"topic_generation_examples", cfg.topic_generation_examples},
                                                       {"topic_definition", business.topic_definition},
                                                       {"no_topic_option", std::string(kNoTopicOption)},
                                                       {"document", document}});
}

/// Calls the model and parses the answer; an unusable answer is re-asked once, bypassing the cache.
template <typename Parse>
auto ask_parsed(LlmGateway& llm, const std::string& prompt, CallSite site, Parse&& parse) {
  try {
    return parse(llm.ask(prompt, site).text);
  } catch (const ResponseFormatError&) {
    return parse(llm.ask(prompt, site, /*refresh=*/true).text);
  }
}

/// Combined mode: one generation call whose per-document lines both name and assign topics.
ClusterGenerationResult generate_combined(std::span<const Document> docs, const BusinessDefinition& business,
                                          const EngineConfig& cfg, LlmGateway& llm, const PromptLibrary& prompts) {
  ClusterGenerationResult r;
  const auto prompt = generation_prompt(docs, business, cfg, prompts, true);
  auto raw = ask_parsed(llm, prompt, CallSite::generation, [&](const std::string& text) {
    if (is_none_response(text)) return std::vector<std::optional<std::string>>(docs.size());
    return parse_indexed_lines(text, docs.size());
  });
  for (std::size_t i = 0; i < docs.size(); ++i) {
    std::string name = raw[i] ? trim(*raw[i]) : std::string();
    if (name.empty() || is_none_response(name) || to_lower(name) == to_lower(kOther)) {
      r.doc_topic_map[docs[i].id] = std::string(kOther);
      continue;
    }
    if (auto idx = match_name(name, r.topics)) {
      name = r.topics[*idx];
    } else {
      r.topics.push_back(name);
    }
    r.doc_topic_map[docs[i].id] = name;
  }
  return r;
}

}  // namespace

void RefinementConfig::validate() const {
  std::vector<std::string> bad;
  if (min_topic_size < 1) bad.push_back("engine.min_topic_size");
  if (max_merge_rounds < 1) bad.push_back("engine.max_merge_rounds");
  if (!bad.empty()) throw ValidationError("invalid refinement configuration", bad);
}

std::vector<std::string> generate_cluster_topics(std::span<const Document> docs, const BusinessDefinition& business,
                                                 const EngineConfig& cfg, LlmGateway& llm,
                                                 const PromptLibrary& prompts) {
  if (docs.empty()) throw PreconditionError("topic generation needs at least one document");
  const auto prompt = generation_prompt(docs, business, cfg, prompts, false);
  return ask_parsed(llm, prompt, CallSite::generation, [](const std::string& text) {
    if (is_none_response(text)) return std::vector<std::string>{};
    return parse_topic_list(text);
  });
}

std::map<std::string, std::string> assign_cluster(std::span<const Document> docs,
                                                  std::span<const std::string> candidates, const EngineConfig& cfg,
                                                  LlmGateway& llm, const PromptLibrary& prompts) {
  if (docs.empty()) throw PreconditionError("topic assignment needs at least one document");
  std::map<std::string, std::string> out;
  if (candidates.empty()) {
    for (const auto& d : docs) out[d.id] = std::string(kOther);
    return out;
  }
  std::string document = render_docs(docs, cfg.max_doc_chars);
  if (docs.size() > 1) document += "\n\n" + std::string(kPerDocFormat);
  const auto prompt =
      prompts.render(PromptName::topic_assignment, {{"document", document}, {"main_topics", join_lines(candidates)}});
  const auto choice = ask_parsed(llm, prompt, CallSite::assignment, [&](const std::string& text) {
    return parse_assignment_response(text, docs.size(), candidates);
  });
  for (std::size_t i = 0; i < docs.size(); ++i)
    out[docs[i].id] = choice[i] ? candidates[*choice[i]] : std::string(kOther);
  return out;
}

ClusterGenerationResult generate_and_assign_cluster(std::span<const Document> docs,
                                                    const BusinessDefinition& business, std::size_t cluster_index,
                                                    const EngineConfig& cfg, LlmGateway& llm,
                                                    const PromptLibrary& prompts) {
  if (docs.empty()) throw PreconditionError("cluster " + std::to_string(cluster_index) + " has no documents");
  ClusterGenerationResult r;
  try {
    if (cfg.combined_call) {
      r = generate_combined(docs, business, cfg, llm, prompts);
    } else {
      r.topics = generate_cluster_topics(docs, business, cfg, llm, prompts);
      r.doc_topic_map = assign_cluster(docs, r.topics, cfg, llm, prompts);
    }
  } catch (const Error& e) {
    r = {};
    r.failed = true;
    r.failure = "cluster " + std::to_string(cluster_index) + ": " + e.what();
    for (const auto& d : docs) r.doc_topic_map[d.id] = std::string(kOther);
  }
  r.cluster_index = cluster_index;
  return r;
}

RefineOutcome refine_topics(std::vector<Topic> topics, std::vector<TopicAssignment> assignments,
                            const RefinementConfig& cfg, const BusinessDefinition& business,
                            const std::string& merge_examples, LlmGateway& llm, const PromptLibrary& prompts) {
  cfg.validate();
  {
    std::set<std::string> ids;
    for (const auto& t : topics) ids.insert(t.id);
    std::vector<std::string> bad;
    for (const auto& a : assignments)
      if (!a.is_other() && !ids.contains(a.topic_id)) bad.push_back(a.doc_id);
    if (!bad.empty()) throw ValidationError("assignments reference unknown topics", bad);
  }
  RefineOutcome out{std::move(topics), std::move(assignments), 0, {}};

  while (out.rounds < cfg.max_merge_rounds && out.topics.size() >= 2) {
    std::map<std::string, std::size_t> size;
    for (const auto& a : out.assignments) ++size[a.topic_id];
    // Small topics first; the listing order defines the indices the model answers with.
    std::vector<std::size_t> order(out.topics.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_partition(order.begin(), order.end(),
                          [&](std::size_t i) { return size[out.topics[i].id] < cfg.min_topic_size; });
    std::string listing;
    for (std::size_t i = 0; i < order.size(); ++i)
      listing += (i ? "\n[" : "[") + std::to_string(i) + "] " + out.topics[order[i]].name;

    const auto prompt = prompts.render(PromptName::topic_merge, {{"topic_merge_examples", merge_examples},
                                                                 {"topic_definition", business.topic_definition},
                                                                 {"topic", listing}});
    MergeParse parsed;
    ++out.rounds;
    try {
      parsed = ask_parsed(llm, prompt, CallSite::refinement,
                          [&](const std::string& text) { return parse_merge_directives(text, order.size()); });
    } catch (const Error& e) {
      out.failures.push_back("refinement round " + std::to_string(out.rounds) + ": " + e.what());
      break;
    }
    if (std::holds_alternative<NoChange>(parsed)) break;

    bool changed = false;
    long long next_id = std::stoll(next_topic_id(out.topics).substr(1));
    std::map<std::string, std::string> remap;  // absorbed id -> survivor id
    std::vector<Topic> next;
    std::map<std::size_t, Topic> survivors;  // position of first source -> new topic
    std::set<std::size_t> absorbed;
    for (const auto& d : std::get<std::vector<MergeDirective>>(parsed)) {
      std::vector<std::size_t> src;
      for (auto li : d.indices) src.push_back(order[li]);
      std::sort(src.begin(), src.end());
      if (src.size() == 1 && out.topics[src[0]].name == d.name) continue;
      Topic t;
      t.id = "t" + std::to_string(next_id++);
      t.name = d.name;
      t.source_cluster = out.topics[src[0]].source_cluster;
      for (auto s : src) {
        const auto& st = out.topics[s];
        if (st.source_cluster != t.source_cluster) t.source_cluster.reset();
        t.merged_from.push_back(st.id);
        t.merged_from.insert(t.merged_from.end(), st.merged_from.begin(), st.merged_from.end());
        remap[st.id] = t.id;
        absorbed.insert(s);
      }
      survivors.emplace(src[0], std::move(t));
      changed = true;
    }
    const std::size_t original = out.topics.size();
    if (!changed) break;
    for (std::size_t i = 0; i < original; ++i) {
      if (auto it = survivors.find(i); it != survivors.end()) next.push_back(std::move(it->second));
      else if (!absorbed.contains(i)) next.push_back(std::move(out.topics[i]));
    }
    out.topics = std::move(next);
    for (auto& a : out.assignments) {
      if (auto it = remap.find(a.topic_id); it != remap.end()) {
        a.topic_id = it->second;
        a.stage = AssignmentStage::remapped;
      }
    }
  }
  return out;
}

RunPlan plan_run(std::span<const Document> corpus, const PipelineConfig& cfg) {
  if (corpus.empty()) throw PreconditionError("empty corpus");
  cfg.clustering.validate();
  RunPlan p;
  p.n_docs = corpus.size();
  p.k = cfg.clustering.k ? *cfg.clustering.k : choose_k(corpus.size(), cfg.clustering);
  if (p.k > p.n_docs)
    throw PreconditionError("k=" + std::to_string(p.k) + " exceeds number of documents " + std::to_string(p.n_docs));
  if (cfg.summarize)
    for (const auto& d : corpus)
      if (word_count(d.text) >= cfg.summarization.min_words_to_summarize) ++p.summarization_calls;
  p.core_call_budget = (cfg.engine.combined_call ? 1 : 2) * p.k + cfg.engine.refinement.max_merge_rounds;
  return p;
}

TopicModelRun run_topic_modeling(std::span<const Document> corpus, const PipelineConfig& cfg,
                                 const PipelineContext& ctx) {
  if (corpus.empty()) throw PreconditionError("run_topic_modeling needs a nonempty corpus");
  validate_corpus(corpus);
  cfg.clustering.validate();
  cfg.engine.refinement.validate();

  TopicModelRun run;
  run.provenance["timestamps"]["started_at"] = utc_now();
  const auto calls_before = ctx.llm.ledger().total_calls();

  std::vector<Document> docs(corpus.begin(), corpus.end());
  if (cfg.summarize) {
    auto s = summarize_corpus(corpus, cfg.summarization, ctx.llm, ctx.prompts);
    std::map<std::string, Document> ok;
    for (auto& d : s.documents) ok.emplace(d.id, std::move(d));
    for (auto& d : docs)
      if (auto it = ok.find(d.id); it != ok.end()) d = std::move(it->second);
    for (const auto& [id, msg] : s.failures) run.failures.push_back("summarization of '" + id + "': " + msg);
  }

  std::vector<std::string> ids, texts;
  for (const auto& d : docs) {
    ids.push_back(d.id);
    texts.push_back(d.working_text());
  }
  const Embeddings vectors = embed_batch(ctx.embedder, texts);
  const auto km = kmeans_fit<double>(ids, vectors, cfg.clustering);
  run.clustering = km.clustering;
  run.provenance["kmeans"] = {{"k", km.clustering.k()}, {"sse", km.sse}, {"iterations", km.iterations_run}};

  std::vector<std::vector<Document>> members(km.clustering.k());
  for (std::size_t i = 0; i < docs.size(); ++i) members[km.labels[i]].push_back(docs[i]);
  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < members.size(); ++c)
    if (!members[c].empty()) active.push_back(c);

  const auto workers = ctx.llm.options().max_concurrency;
  std::vector<ClusterGenerationResult> results(active.size());
  if (cfg.engine.global_assignment && !cfg.engine.combined_call) {
    std::vector<std::optional<std::string>> gen_error(active.size());
    parallel_for(active.size(), workers, [&](std::size_t i) {
      results[i].cluster_index = active[i];
      try {
        results[i].topics = generate_cluster_topics(members[active[i]], cfg.business, cfg.engine, ctx.llm, ctx.prompts);
      } catch (const Error& e) {
        gen_error[i] = e.what();
      }
    });
    std::vector<std::string> global;
    for (const auto& r : results)
      for (const auto& t : r.topics)
        if (!match_name(t, global)) global.push_back(t);
    parallel_for(active.size(), workers, [&](std::size_t i) {
      auto& r = results[i];
      try {
        if (gen_error[i]) throw Error(*gen_error[i]);
        r.doc_topic_map = assign_cluster(members[active[i]], global, cfg.engine, ctx.llm, ctx.prompts);
      } catch (const Error& e) {
        r.failed = true;
        r.failure = "cluster " + std::to_string(r.cluster_index) + ": " + e.what();
        r.topics.clear();
        for (const auto& d : members[active[i]]) r.doc_topic_map[d.id] = std::string(kOther);
      }
    });
  } else {
    parallel_for(active.size(), workers, [&](std::size_t i) {
      results[i] = generate_and_assign_cluster(members[active[i]], cfg.business, active[i], cfg.engine, ctx.llm,
                                               ctx.prompts);
    });
  }

  // Assemble in cluster order; topic ids are allocated in generation order.
  std::map<std::string, std::string> doc_topic;
  std::vector<std::pair<std::string, std::string>> global_names;  // name -> id, for global assignment
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (r.failed) {
      ++failed;
      run.failures.push_back(r.failure);
    }
    std::map<std::string, std::string> local;  // name -> id
    for (const auto& name : r.topics) {
      Topic t{"t" + std::to_string(run.topics.size()), name, r.cluster_index, std::nullopt, {}};
      local.emplace(name, t.id);
      global_names.emplace_back(name, t.id);
      run.topics.push_back(std::move(t));
    }
    for (const auto& [doc, name] : r.doc_topic_map) {
      if (name == kOther) {
        doc_topic[doc] = std::string(kOther);
      } else if (auto it = local.find(name); it != local.end()) {
        doc_topic[doc] = it->second;
      } else {
        std::vector<std::string> names;
        for (const auto& [n, _] : global_names) names.push_back(n);
        const auto idx = match_name(name, names);
        doc_topic[doc] = idx ? global_names[*idx].second : std::string(kOther);
      }
    }
  }
  if (!results.empty() && failed == results.size())
    throw ValidationError("every cluster failed", run.failures);

  for (const auto& d : docs) {
    const auto& tid = doc_topic.at(d.id);
    run.assignments.push_back(
        {d.id, tid, tid == kOther ? AssignmentStage::other : AssignmentStage::generated});
  }

  auto refined = refine_topics(std::move(run.topics), std::move(run.assignments), cfg.engine.refinement, cfg.business,
                               cfg.engine.topic_merge_examples, ctx.llm, ctx.prompts);
  run.topics = std::move(refined.topics);
  run.assignments = std::move(refined.assignments);
  run.failures.insert(run.failures.end(), refined.failures.begin(), refined.failures.end());

  run.config = cfg.snapshot;
  std::string fingerprint = cfg.snapshot.dump() + "\n";
  for (const auto& d : corpus) fingerprint += d.id + "\t" + d.text + "\n";
  run.run_id = sha256_hex(fingerprint).substr(0, 16);
  run.llm_call_count = ctx.llm.ledger().total_calls() - calls_before;
  run.provenance["ledger"] = ctx.llm.ledger().to_json();
  run.provenance["timestamps"]["finished_at"] = utc_now();
  validate_run(run);
  return run;
}

std::size_t distill_export(const TopicModelRun& run, std::span<const Document> corpus,
                           const std::filesystem::path& path, bool include_other) {
  if (run.topics.empty()) throw PreconditionError("nothing to distill: the run has no topics");
  validate_run(run);
  std::map<std::string, const Document*> by_id;
  for (const auto& d : corpus) by_id.emplace(d.id, &d);

  std::string rows;
  std::size_t n = 0;
  std::set<std::string> used;
  bool other_used = false;
  std::vector<std::string> missing;
  for (const auto& a : run.assignments) {
    if (a.is_other() && !include_other) continue;
    auto it = by_id.find(a.doc_id);
    if (it == by_id.end()) {
      missing.push_back(a.doc_id);
      continue;
    }
    const std::string label = a.is_other() ? std::string(kOther) : run.find_topic(a.topic_id)->name;
    if (a.is_other()) other_used = true;
    else used.insert(a.topic_id);
    rows += json{{"doc_id", a.doc_id}, {"text", it->second->working_text()}, {"label", label}}.dump() + "\n";
    ++n;
  }
  if (!missing.empty()) throw ValidationError("documents missing from the corpus", missing);
  if (n == 0) throw PreconditionError("nothing to distill: no assigned documents");

  json labels = json::array();
  std::set<std::string> names;
  for (const auto& t : run.topics)
    if (used.contains(t.id) && names.insert(t.name).second) labels.push_back(t.name);
  if (other_used && names.insert(std::string(kOther)).second) labels.push_back(std::string(kOther));

  write_file_atomic(path, rows);
  write_file_atomic(path.parent_path() / "labels.json", labels.dump(2) + "\n");
  return n;
}

}  // namespace grantopic
