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
#include "grantopic/cli.hpp"

#include <filesystem>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "grantopic/auto_eval.hpp"
#include "grantopic/cluster_metrics.hpp"
#include "grantopic/config.hpp"
#include "grantopic/corpus_io.hpp"
#include "grantopic/errors.hpp"
#include "grantopic/hierarchy.hpp"
#include "grantopic/summarizer.hpp"
#include "grantopic/topic_engine.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace grantopic {
namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string mock;
  std::string cache_dir;
  std::string out;
  std::vector<std::string> set;
};

/// Provider, gateway, prompts and embedder built from a resolved config.
struct Runtime {
  explicit Runtime(const RunConfig& cfg)
      : llm(make_provider(cfg), cfg.llm.gateway),
        prompts(cfg.prompts_dir.empty() ? PromptLibrary::canonical() : PromptLibrary::with_overrides(cfg.prompts_dir)),
        embedder(make_embedder(cfg)),
        ctx{llm, prompts, *embedder} {}

  static std::shared_ptr<LlmProvider> make_provider(const RunConfig& cfg) {
    if (cfg.llm.provider == "mock") return MockProvider::from_file(cfg.llm.mock_script);
    return std::make_shared<HttpChatProvider>(cfg.llm.http);
  }
  static std::unique_ptr<EmbeddingProvider> make_embedder(const RunConfig& cfg) {
    if (cfg.embedding.provider == "http") return std::make_unique<HttpEmbedder>(cfg.embedding.http);
    return std::make_unique<HashingEmbedder>(cfg.embedding.dim, cfg.embedding.ngram);
  }

  LlmGateway llm;
  PromptLibrary prompts;
  std::unique_ptr<EmbeddingProvider> embedder;
  PipelineContext ctx;
};

RunConfig resolve(const GlobalFlags& g) {
  std::vector<std::string> overrides = g.set;
  if (g.seed) overrides.push_back("seed=" + std::to_string(*g.seed));
  if (!g.mock.empty()) {
    overrides.push_back("llm.provider=mock");
    overrides.push_back("llm.mock_script=" + g.mock);
  }
  if (!g.cache_dir.empty()) overrides.push_back("llm.cache_dir=" + g.cache_dir);
  if (!g.out.empty()) overrides.push_back("output_dir=" + g.out);
  std::optional<fs::path> file;
  if (!g.config.empty()) file = g.config;
  return load_config(file, overrides);
}

void require_dir(const fs::path& p, const char* what) {
  if (!fs::is_directory(p)) throw IoError(std::string(what) + " not found: " + p.string());
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw IoError(std::string(what) + " not found: " + p.string());
}

fs::path output_dir(const RunConfig& cfg, const fs::path& fallback) {
  return cfg.output_dir.empty() ? fallback : fs::path(cfg.output_dir);
}

json error_json(const std::exception& e) {
  json j = {{"error", "error"}, {"message", e.what()}};
  if (dynamic_cast<const ValidationError*>(&e)) {
    j["error"] = "validation";
    j["items"] = dynamic_cast<const ValidationError&>(e).items();
  } else if (dynamic_cast<const ParseError*>(&e)) {
    j["error"] = "parse";
    j["line"] = dynamic_cast<const ParseError&>(e).line();
  } else if (dynamic_cast<const IoError*>(&e)) {
    j["error"] = "io";
  } else if (dynamic_cast<const PreconditionError*>(&e)) {
    j["error"] = "precondition";
  } else if (dynamic_cast<const TransportError*>(&e) || dynamic_cast<const ProviderError*>(&e)) {
    j["error"] = "llm";
  }
  return j;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster-then-generate topic modeling with LLM labeling and evaluation", "grantopic"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "INI config file");
  app.add_option("--seed", g.seed, "Seed for every randomized stage");
  app.add_option("--mock", g.mock, "Mock provider script (JSON); selects the mock LLM");
  app.add_option("--cache-dir", g.cache_dir, "LLM response cache directory");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--set", g.set, "Config override section.key=value (repeatable)");

  std::string corpus, run_dir, gold, export_path;
  bool dry_run = false, drop_other = false, la_only = false, judges_only = false, include_other = false;
  std::optional<std::size_t> sample_cap;

  auto* summarize = app.add_subcommand("summarize", "Summarize long documents; writes summaries.jsonl");
  summarize->add_option("corpus", corpus, "Corpus JSONL")->required();

  auto* model = app.add_subcommand("model", "Run the topic modeling pipeline into the output directory");
  model->add_option("corpus", corpus, "Corpus JSONL")->required();
  model->add_flag("--dry-run", dry_run, "Print the cluster count and call budget only");

  auto* hierarchy = app.add_subcommand("hierarchy", "Group a run's topics under parent topics");
  hierarchy->add_option("run_dir", run_dir, "Run directory")->required();

  auto* metrics = app.add_subcommand("metrics", "Compare a run with gold labels; writes metrics.json");
  metrics->add_option("run_dir", run_dir, "Run directory")->required();
  metrics->add_option("gold", gold, "Gold-labeled corpus JSONL")->required();
  metrics->add_flag("--drop-other", drop_other, "Exclude documents assigned to Other");

  auto* evaluate = app.add_subcommand("evaluate", "Label-free evaluation; writes eval_report.json");
  evaluate->add_option("run_dir", run_dir, "Run directory")->required();
  evaluate->add_option("corpus", corpus, "Corpus JSONL")->required();
  auto* la_flag = evaluate->add_flag("--label-accuracy-only", la_only);
  evaluate->add_flag("--judges-only", judges_only)->excludes(la_flag);
  evaluate->add_option("--sample-cap", sample_cap, "Maximum judged (document, topic) pairs");

  auto* export_cmd = app.add_subcommand("export-distill", "Export assignments for classifier distillation");
  export_cmd->add_option("run_dir", run_dir, "Run directory")->required();
  export_cmd->add_option("path", export_path, "Output JSONL path (labels.json is written next to it)")->required();
  export_cmd->add_option("--corpus", corpus, "Corpus JSONL (defaults to the one recorded in the run)");
  export_cmd->add_flag("--include-other", include_other);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    const RunConfig cfg = resolve(g);

    if (*summarize) {
      require_file(corpus, "corpus");
      const auto docs = load_corpus(corpus);
      Runtime rt(cfg);
      auto outcome = summarize_corpus(docs, cfg.pipeline.summarization, rt.llm, rt.prompts);
      outcome.throw_if_failed();
      const fs::path dir = output_dir(cfg, ".");
      fs::create_directories(dir);
      save_corpus(outcome.documents, dir / "summaries.jsonl");
      out << json{{"summaries", (dir / "summaries.jsonl").string()},
                  {"n_docs", outcome.documents.size()},
                  {"llm_calls", rt.llm.ledger().calls_json()}}
                 .dump()
          << "\n";
      return 0;
    }

    if (*model) {
      require_file(corpus, "corpus");
      const auto docs = load_corpus(corpus);
      if (dry_run) {
        const auto plan = plan_run(docs, cfg.pipeline);
        Runtime rt(cfg);
        out << json{{"n_docs", plan.n_docs},
                    {"k", plan.k},
                    {"summarization_calls", plan.summarization_calls},
                    {"core_call_budget", plan.core_call_budget},
                    {"ledger", rt.llm.ledger().to_json()}}
                   .dump()
            << "\n";
        return 0;
      }
      if (cfg.output_dir.empty()) throw PreconditionError("model needs an output directory (--out or output_dir)");
      Runtime rt(cfg);
      auto run = run_topic_modeling(docs, cfg.pipeline, rt.ctx);
      run.provenance["paths"] = {{"corpus", fs::absolute(corpus).string()},
                                 {"output_dir", cfg.output_dir},
                                 {"cache_dir", cfg.llm.gateway.cache_dir ? cfg.llm.gateway.cache_dir->string() : ""}};
      save_run(run, cfg.output_dir);
      out << json{{"run_dir", cfg.output_dir},
                  {"run_id", run.run_id},
                  {"n_topics", run.topics.size()},
                  {"llm_call_count", run.llm_call_count},
                  {"failures", run.failures}}
                 .dump()
          << "\n";
      return 0;
    }

    if (*hierarchy) {
      require_dir(run_dir, "run directory");
      const auto run = load_run(run_dir);
      Runtime rt(cfg);
      auto outcome = detect_hierarchy(run, cfg.hierarchy, rt.ctx);
      for (const auto& w : outcome.warnings) err << "warning: " << w << "\n";
      const fs::path dir = output_dir(cfg, run_dir);
      save_run(outcome.run, dir);
      write_file_atomic(dir / "hierarchy.json", to_json(outcome.result).dump(2) + "\n");
      out << json{{"hierarchy", (dir / "hierarchy.json").string()},
                  {"n_parents", outcome.result.parents.size()},
                  {"warnings", outcome.warnings}}
                 .dump()
          << "\n";
      return 0;
    }

    if (*metrics) {
      require_dir(run_dir, "run directory");
      require_file(gold, "gold corpus");
      const auto run = load_run(run_dir);
      const auto docs = load_corpus(gold);
      const auto m = evaluate_against_gold(run, docs, drop_other);
      const fs::path dir = output_dir(cfg, run_dir);
      fs::create_directories(dir);
      const auto j = to_json(m);
      write_file_atomic(dir / "metrics.json", j.dump(2) + "\n");
      out << j.dump() << "\n";
      return 0;
    }

    if (*evaluate) {
      require_dir(run_dir, "run directory");
      require_file(corpus, "corpus");
      const auto run = load_run(run_dir);
      const auto docs = load_corpus(corpus);
      EvalConfig ec = cfg.eval;
      if (sample_cap) {
        if (*sample_cap == 0) throw ValidationError("invalid option", {"--sample-cap"});
        ec.sample_cap = *sample_cap;
      }
      ec.run_label_accuracy = !judges_only;
      ec.run_judges = !la_only;
      Runtime rt(cfg);
      const auto report = evaluate_run(run, docs, ec, rt.ctx);
      for (const auto& e : report.errors) err << "warning: " << e << "\n";
      const fs::path dir = output_dir(cfg, run_dir);
      fs::create_directories(dir);
      const auto j = to_json(report);
      write_file_atomic(dir / "eval_report.json", j.dump(2) + "\n");
      out << j.dump() << "\n";
      return 0;
    }

    if (*export_cmd) {
      require_dir(run_dir, "run directory");
      const auto run = load_run(run_dir);
      fs::path corpus_path = corpus;
      if (corpus_path.empty()) {
        const auto& p = run.provenance;
        if (!p.contains("paths") || !p["paths"].contains("corpus"))
          throw PreconditionError("run records no corpus path; pass --corpus");
        corpus_path = p["paths"]["corpus"].get<std::string>();
      }
      require_file(corpus_path, "corpus");
      const auto docs = load_corpus(corpus_path);
      const bool other = include_other || cfg.include_other_in_export;
      const auto rows = distill_export(run, docs, export_path, other);
      out << json{{"path", export_path},
                  {"labels", (fs::path(export_path).parent_path() / "labels.json").string()},
                  {"rows", rows}}
                 .dump()
          << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n" << error_json(e).dump() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace grantopic
