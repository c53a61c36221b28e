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
#include "grantopic/auto_eval.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "grantopic/errors.hpp"
#include "grantopic/parallel.hpp"
#include "grantopic/parsers.hpp"

using nlohmann::json;

namespace grantopic {
namespace {

/// First `m` entries of a seeded partial Fisher-Yates shuffle of [0, n).
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  m = std::min(m, n);
  for (std::size_t i = 0; i < m; ++i) std::swap(idx[i], idx[i + rng() % (n - i)]);
  idx.resize(m);
  return idx;
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

std::map<std::string, const Document*> index_corpus(std::span<const Document> corpus) {
  std::map<std::string, const Document*> m;
  for (const auto& d : corpus) m.emplace(d.id, &d);
  return m;
}

std::vector<const Topic*> granular_topics(const TopicModelRun& run) {
  std::set<std::string> parents;
  for (const auto& t : run.topics)
    if (t.parent_id) parents.insert(*t.parent_id);
  std::vector<const Topic*> out;
  for (const auto& t : run.topics)
    if (!parents.contains(t.id)) out.push_back(&t);
  return out;
}

int judge(PromptName tpl, const JudgeScale& scale, const std::string& doc_text, const std::string& topic_name,
          const BusinessDefinition& business, LlmGateway& llm, const PromptLibrary& prompts) {
  if (doc_text.empty() || topic_name.empty()) throw PreconditionError("judge needs a nonempty text and topic");
  const auto prompt = prompts.render(tpl, {{"text", doc_text},
                                           {"topic", topic_name},
                                           {"topic_definition", business.topic_definition},
                                           {"domain_description", business.domain_description}});
  try {
    return parse_judge_level(llm.ask(prompt, CallSite::judge).text, scale);
  } catch (const ResponseFormatError&) {
    return parse_judge_level(llm.ask(prompt, CallSite::judge, /*refresh=*/true).text, scale);
  }
}

json to_json(const JudgeStats& s) {
  return {{"mean", s.mean ? json(*s.mean) : json(nullptr)}, {"histogram", s.histogram}};
}

}  // namespace

void LabelAccuracyConfig::validate() const {
  std::vector<std::string> bad;
  if (n_samples_per_topic < 1) bad.push_back("label_accuracy.n_samples_per_topic");
  if (top_k < 1) bad.push_back("label_accuracy.top_k");
  if (!bad.empty()) throw ValidationError("invalid label accuracy configuration", bad);
}

int judge_topic_accuracy(const std::string& doc_text, const std::string& topic_name,
                         const BusinessDefinition& business, LlmGateway& llm, const PromptLibrary& prompts) {
  return judge(PromptName::topic_accuracy_judge, kAccuracyScale, doc_text, topic_name, business, llm, prompts);
}

int judge_topic_completeness(const std::string& doc_text, const std::string& topic_name,
                             const BusinessDefinition& business, LlmGateway& llm, const PromptLibrary& prompts) {
  return judge(PromptName::topic_completeness_judge, kCompletenessScale, doc_text, topic_name, business, llm,
               prompts);
}

LabelAccuracyResult label_accuracy(const TopicModelRun& run, std::span<const Document> corpus,
                                   const LabelAccuracyConfig& cfg, const PipelineContext& ctx) {
  cfg.validate();
  const auto topics = granular_topics(run);
  if (topics.size() < 2)
    throw PreconditionError("label accuracy needs at least 2 topics, run has " + std::to_string(topics.size()));
  const auto docs = index_corpus(corpus);

  std::map<std::string, std::size_t> topic_pos;
  for (std::size_t i = 0; i < topics.size(); ++i) topic_pos.emplace(topics[i]->id, i);
  std::vector<std::vector<const Document*>> members(topics.size());
  for (const auto& a : run.assignments) {
    if (a.is_other()) continue;
    auto t = topic_pos.find(a.topic_id);
    auto d = docs.find(a.doc_id);
    if (t != topic_pos.end() && d != docs.end()) members[t->second].push_back(d->second);
  }

  std::vector<std::string> names;
  for (const auto* t : topics) names.push_back(t->name);
  Embeddings topic_vecs = embed_batch(ctx.embedder, names);
  if (cfg.topic_embedding == TopicEmbedding::centroid) {
    for (std::size_t i = 0; i < topics.size(); ++i) {
      if (members[i].empty()) continue;
      std::vector<std::string> texts;
      for (const auto* d : members[i]) texts.push_back(d->working_text());
      const Embeddings dv = embed_batch(ctx.embedder, texts);
      topic_vecs.row(static_cast<Eigen::Index>(i)) = dv.colwise().mean().normalized();
    }
  }

  struct Job {
    std::size_t topic;
    const Document* doc;
    std::vector<std::size_t> candidates;  // topic positions, original included
  };
  std::vector<Job> jobs;
  LabelAccuracyResult out;
  std::mt19937_64 rng(cfg.seed);
  for (std::size_t i = 0; i < topics.size(); ++i) {
    if (members[i].empty()) {
      out.skipped_topics.push_back(topics[i]->id);
      continue;
    }
    // Neighbours among the other topics, by similarity to this topic.
    Embeddings others(static_cast<Eigen::Index>(topics.size() - 1), topic_vecs.cols());
    std::vector<std::size_t> other_pos;
    for (std::size_t j = 0; j < topics.size(); ++j) {
      if (j == i) continue;
      others.row(static_cast<Eigen::Index>(other_pos.size())) = topic_vecs.row(static_cast<Eigen::Index>(j));
      other_pos.push_back(j);
    }
    std::vector<std::size_t> candidates{i};
    for (auto n : top_k_similar(topic_vecs.row(static_cast<Eigen::Index>(i)).transpose(), others, cfg.top_k))
      candidates.push_back(other_pos[n]);
    for (auto s : sample_indices(members[i].size(), cfg.n_samples_per_topic, rng)) {
      Job job{i, members[i][s], candidates};
      if (cfg.shuffle_candidates) shuffle_in_place(job.candidates, rng);
      jobs.push_back(std::move(job));
    }
  }

  // verdict: 1 retained, 0 switched, -1 missing
  std::vector<int> verdict(jobs.size(), -1);
  parallel_for(jobs.size(), ctx.llm.options().max_concurrency, [&](std::size_t j) {
    const auto& job = jobs[j];
    std::vector<std::string> cand_names;
    std::string listing;
    for (auto c : job.candidates) {
      cand_names.push_back(names[c]);
      listing += (listing.empty() ? "- " : "\n- ") + names[c];
    }
    const auto prompt = ctx.prompts.render(PromptName::label_accuracy_judge,
                                           {{"document", job.doc->working_text()}, {"candidate_topics", listing}});
    try {
      auto pick = match_name(ctx.llm.ask(prompt, CallSite::judge).text, cand_names);
      if (!pick) pick = match_name(ctx.llm.ask(prompt, CallSite::judge, /*refresh=*/true).text, cand_names);
      if (pick) verdict[j] = cand_names[*pick] == names[job.topic] ? 1 : 0;
    } catch (const Error&) {
      verdict[j] = -1;
    }
  });

  std::map<std::size_t, TopicLabelAccuracy> per_topic;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    auto& t = per_topic[jobs[j].topic];
    t.topic_id = topics[jobs[j].topic]->id;
    t.name = names[jobs[j].topic];
    ++t.sampled;
    if (verdict[j] < 0) ++t.missing;
    else t.retained += static_cast<std::size_t>(verdict[j]);
  }
  double sum = 0;
  std::size_t defined = 0;
  for (auto& [_, t] : per_topic) {
    out.missing_verdicts += t.missing;
    if (t.sampled > t.missing) {
      t.accuracy = static_cast<double>(t.retained) / static_cast<double>(t.sampled - t.missing);
      sum += *t.accuracy;
      ++defined;
    }
    out.per_topic.push_back(t);
  }
  if (defined) out.macro = sum / static_cast<double>(defined);
  return out;
}

EvalReport evaluate_run(const TopicModelRun& run, std::span<const Document> corpus, const EvalConfig& cfg,
                        const PipelineContext& ctx) {
  validate_run(run);
  EvalReport report;
  report.config = {{"n_samples_per_topic", cfg.label_accuracy.n_samples_per_topic},
                   {"top_k", cfg.label_accuracy.top_k},
                   {"topic_embedding", cfg.label_accuracy.topic_embedding == TopicEmbedding::name ? "name" : "centroid"},
                   {"shuffle_candidates", cfg.label_accuracy.shuffle_candidates},
                   {"label_accuracy_seed", cfg.label_accuracy.seed},
                   {"sample_cap", cfg.sample_cap},
                   {"seed", cfg.seed},
                   {"similarity", "cosine"}};

  const auto docs = index_corpus(corpus);
  std::vector<std::pair<const Document*, const Topic*>> pairs;
  for (const auto& a : run.assignments) {
    if (a.is_other()) continue;
    auto d = docs.find(a.doc_id);
    const Topic* t = run.find_topic(a.topic_id);
    if (d != docs.end() && t) pairs.emplace_back(d->second, t);
  }

  if (cfg.run_label_accuracy) {
    const bool applicable = !pairs.empty() && granular_topics(run).size() >= 2;
    if (!applicable) {
      report.label_accuracy_status = "not_applicable";
    } else {
      try {
        report.label_accuracy = label_accuracy(run, corpus, cfg.label_accuracy, ctx);
        report.label_accuracy_status = "ok";
        report.missing_verdicts += report.label_accuracy->missing_verdicts;
      } catch (const Error& e) {
        report.label_accuracy_status = "error";
        report.errors.push_back(std::string("label accuracy: ") + e.what());
      }
    }
  }

  if (cfg.run_judges) {
    report.judges_status = "ok";
    std::mt19937_64 rng(cfg.seed);
    auto keep = sample_indices(pairs.size(), cfg.sample_cap, rng);
    std::sort(keep.begin(), keep.end());
    std::vector<std::array<int, 2>> verdicts(keep.size(), {0, 0});
    parallel_for(keep.size(), ctx.llm.options().max_concurrency, [&](std::size_t j) {
      const auto [doc, topic] = pairs[keep[j]];
      try {
        verdicts[j][0] = judge_topic_accuracy(doc->working_text(), topic->name, cfg.business, ctx.llm, ctx.prompts);
        verdicts[j][1] =
            judge_topic_completeness(doc->working_text(), topic->name, cfg.business, ctx.llm, ctx.prompts);
      } catch (const Error&) {
        verdicts[j] = {0, 0};
      }
    });
    double acc_sum = 0, comp_sum = 0;
    for (std::size_t j = 0; j < keep.size(); ++j) {
      const auto [a, c] = verdicts[j];
      if (a == 0 || c == 0) {
        ++report.missing_verdicts;
        continue;
      }
      ++report.n_judged;
      ++report.topic_accuracy.histogram[static_cast<std::size_t>(a - 1)];
      ++report.topic_completeness.histogram[static_cast<std::size_t>(c - 1)];
      acc_sum += a;
      comp_sum += c;
      const Topic* topic = pairs[keep[j]].second;
      auto& b = report.per_topic[topic->id];
      b.name = topic->name;
      b.accuracy_mean += (a - b.accuracy_mean) / static_cast<double>(++b.n);
      b.completeness_mean += (c - b.completeness_mean) / static_cast<double>(b.n);
    }
    if (report.n_judged) {
      report.topic_accuracy.mean = acc_sum / static_cast<double>(report.n_judged);
      report.topic_completeness.mean = comp_sum / static_cast<double>(report.n_judged);
    }
  }

  if (report.label_accuracy_status == "error" && (!cfg.run_judges || report.n_judged == 0) && !report.errors.empty() &&
      report.judges_status != "ok")
    throw ValidationError("evaluation failed", report.errors);
  return report;
}

json to_json(const EvalReport& r) {
  json la = {{"status", r.label_accuracy_status}};
  if (r.label_accuracy) {
    json per = json::array();
    for (const auto& t : r.label_accuracy->per_topic)
      per.push_back({{"topic_id", t.topic_id},
                     {"name", t.name},
                     {"sampled", t.sampled},
                     {"retained", t.retained},
                     {"missing", t.missing},
                     {"accuracy", t.accuracy ? json(*t.accuracy) : json(nullptr)}});
    la["macro"] = r.label_accuracy->macro ? json(*r.label_accuracy->macro) : json(nullptr);
    la["per_topic"] = per;
    la["skipped_topics"] = r.label_accuracy->skipped_topics;
    la["missing_verdicts"] = r.label_accuracy->missing_verdicts;
  }
  json per_topic = json::object();
  for (const auto& [id, b] : r.per_topic)
    per_topic[id] = {{"name", b.name}, {"n", b.n}, {"accuracy_mean", b.accuracy_mean},
                     {"completeness_mean", b.completeness_mean}};
  return {{"label_accuracy", la},
          {"judges_status", r.judges_status},
          {"topic_accuracy", to_json(r.topic_accuracy)},
          {"topic_completeness", to_json(r.topic_completeness)},
          {"n_judged", r.n_judged},
          {"missing_verdicts", r.missing_verdicts},
          {"per_topic", per_topic},
          {"errors", r.errors},
          {"config", r.config}};
}

}  // namespace grantopic
