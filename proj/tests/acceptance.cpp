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
// Acceptance runner: one PASS/FAIL line per release criterion; exit code 1 if any fails.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "grantopic/cli.hpp"
#include "grantopic/cluster_metrics.hpp"
#include "grantopic/corpus_io.hpp"
#include "grantopic/kmeans.hpp"
#include "grantopic/topic_engine.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace grantopic;
using nlohmann::json;

namespace {

// Pinned tolerances and limits.
constexpr double kOracleTol = 1e-9;
constexpr double kInvariantTol = 1e-12;
constexpr double kOracleBudgetS = 10;
constexpr double kInvariantBudgetS = 30;
constexpr double kKMeansBudgetS = 10;
constexpr int kKMeansSeeds = 50;
constexpr int kKMeansRequired = 48;
constexpr double kSeparationFactor = 10;
constexpr double kScorerFraction = 0.25;
constexpr int kRefineScenarios = 200;

struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok && failures.size() == 5) failures.push_back("...");
  }
};

using Seconds = std::chrono::duration<double>;

Clustering C(const std::vector<int>& labels) { return Clustering::from_labels(gt_oracle::compact(labels)); }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void metric_oracles(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 11;  // 2..12
    const auto u = gt_oracle::random_labels(n, 1 + static_cast<int>(rng() % 5), rng);
    const auto v = gt_oracle::random_labels(n, 1 + static_cast<int>(rng() % 5), rng);
    const double a = ari(C(u), C(v)), ao = gt_oracle::ari_pairs(u, v);
    const double m = nmi(C(u), C(v)), mo = gt_oracle::nmi_plugin(u, v);
    c.expect(std::abs(a - ao) <= kOracleTol, "ari " + fmt(a) + " vs oracle " + fmt(ao));
    c.expect(std::abs(m - mo) <= kOracleTol, "nmi " + fmt(m) + " vs oracle " + fmt(mo));
    c.expect(std::abs(purity(C(u), C(v)) - gt_oracle::purity_count(u, v)) <= kOracleTol, "purity vs count");
    c.expect(std::abs(p1(C(u), C(v)) - gt_oracle::p1_count(u, v)) <= kOracleTol, "p1 vs count");
  }
  // hand-enumerated cases
  c.expect(std::abs(purity(C({0, 0, 0}), C({0, 0, 1})) - 2.0 / 3.0) <= kOracleTol, "purity 2/3");
  c.expect(std::abs(purity(C({0, 0, 1}), C({0, 0, 0})) - 1.0) <= kOracleTol, "purity 1");
  c.expect(std::abs(p1(C({0, 0, 0}), C({0, 0, 1})) - 0.8) <= kOracleTol, "p1 0.8");
  c.expect(std::abs(p1(C({0, 0, 1}), C({0, 0, 0})) - 0.8) <= kOracleTol, "p1 0.8 swapped");
  c.expect(std::abs(ari(C({0, 0, 1, 1}), C({0, 1, 0, 1})) + 0.5) <= kOracleTol, "ari -0.5");
  c.expect(std::abs(gt_oracle::ari_pairs({0, 0, 1, 1}, {0, 1, 0, 1}) + 0.5) <= kOracleTol, "oracle ari -0.5");
  const double s = Seconds(std::chrono::steady_clock::now() - t0).count();
  c.expect(s < kOracleBudgetS, "runtime " + fmt(s) + " s");
}

void metric_invariants(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 2 + rng() % 39;
    const int ku = 1 + static_cast<int>(rng() % 6), kv = 1 + static_cast<int>(rng() % 6);
    const auto u = gt_oracle::random_labels(n, ku, rng);
    const auto v = gt_oracle::random_labels(n, kv, rng);
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> up;
    for (int l : u) up.push_back(perm[static_cast<std::size_t>(l)]);
    const auto cu = C(u), cv = C(v), cup = C(up);
    const double a = ari(cu, cv), m = nmi(cu, cv), p = p1(cu, cv), pu = purity(cu, cv);
    c.expect(std::abs(a - ari(cv, cu)) <= kInvariantTol, "ari symmetry");
    c.expect(std::abs(m - nmi(cv, cu)) <= kInvariantTol, "nmi symmetry");
    c.expect(std::abs(p - p1(cv, cu)) <= kInvariantTol, "p1 symmetry");
    c.expect(std::abs(a - ari(cup, cv)) <= kInvariantTol, "ari permutation");
    c.expect(std::abs(m - nmi(cup, cv)) <= kInvariantTol, "nmi permutation");
    c.expect(std::abs(p - p1(cup, cv)) <= kInvariantTol, "p1 permutation");
    c.expect(std::abs(ari(cu, cu) - 1) <= kInvariantTol && std::abs(nmi(cu, cu) - 1) <= kInvariantTol &&
                 p1(cu, cu) == 1 && purity(cu, cu) == 1,
             "self agreement");
    c.expect(a >= -1 && a <= 1, "ari range " + fmt(a));
    c.expect(m >= 0 && m <= 1, "nmi range " + fmt(m));
    c.expect(p >= 0 && p <= 1 && pu >= 0 && pu <= 1, "purity range");
  }
  const double s = Seconds(std::chrono::steady_clock::now() - t0).count();
  c.expect(s < kInvariantBudgetS, "runtime " + fmt(s) + " s");
}

bool sse_non_increasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] > h[i - 1]) return false;
  return true;
}

void kmeans_criterion(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr int kBlobs = 4, kPer = 10, kDim = 16;
  constexpr double kSpread = 0.5;  // max distance of a point from its blob center
  int recovered = 0;
  std::vector<std::string> ids;
  std::vector<int> truth;
  for (int i = 0; i < kBlobs * kPer; ++i) {
    ids.push_back("d" + std::to_string(i));
    truth.push_back(i / kPer);
  }
  for (int seed = 0; seed < kKMeansSeeds; ++seed) {
    std::mt19937_64 data_rng(1000 + static_cast<std::uint64_t>(seed));
    std::normal_distribution<double> gauss(0, 1);
    // centers on scaled axes, 10x the blob diameter apart along each
    Embeddings x(kBlobs * kPer, kDim);
    for (int i = 0; i < kBlobs * kPer; ++i) {
      Eigen::VectorXd off(kDim);
      for (int d = 0; d < kDim; ++d) off(d) = gauss(data_rng);
      off *= kSpread * std::pow(std::uniform_real_distribution<double>(0, 1)(data_rng), 1.0 / kDim) / off.norm();
      x.row(i) = off.transpose();
      x(i, i / kPer) += kSeparationFactor * 2 * kSpread;
    }
    // measured separation vs spread
    double min_between = 1e300, max_within = 0;
    for (int i = 0; i < x.rows(); ++i)
      for (int j = i + 1; j < x.rows(); ++j) {
        const double d = (x.row(i) - x.row(j)).norm();
        if (truth[i] == truth[j]) max_within = std::max(max_within, d);
        else min_between = std::min(min_between, d);
      }
    c.expect(min_between >= kSeparationFactor * max_within, "fixture separation");

    KMeansConfig cfg;
    cfg.k = kBlobs;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const auto r1 = kmeans_fit<double>(ids, x, cfg);
    const auto r2 = kmeans_fit<double>(ids, x, cfg);
    c.expect(sse_non_increasing(r1.sse_history), "sse increased, seed " + std::to_string(seed));
    c.expect(r1.labels == r2.labels && r1.centroids == r2.centroids && r1.sse == r2.sse,
             "nondeterministic, seed " + std::to_string(seed));
    std::vector<int> got(r1.labels.begin(), r1.labels.end());
    if (gt_oracle::ari_pairs(got, truth) == 1.0) ++recovered;
  }
  // SSE monotonicity on unstructured data too
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    std::uniform_real_distribution<double> unif(0, 1);
    Embeddings x = Embeddings::NullaryExpr(60, 8, [&] { return unif(rng); });
    std::vector<std::string> rid;
    for (int i = 0; i < 60; ++i) rid.push_back("r" + std::to_string(i));
    KMeansConfig cfg;
    cfg.k = 2 + static_cast<std::size_t>(t % 7);
    cfg.tol = 1e-12;
    cfg.seed = static_cast<std::uint64_t>(t);
    c.expect(sse_non_increasing(kmeans_fit<double>(rid, x, cfg).sse_history), "sse increased on random data");
  }
  c.expect(recovered >= kKMeansRequired, "recovered " + std::to_string(recovered) + "/" + std::to_string(kKMeansSeeds));
  const double s = Seconds(std::chrono::steady_clock::now() - t0).count();
  c.expect(s < kKMeansBudgetS, "runtime " + fmt(s) + " s");
  std::cout << "  blob recovery " << recovered << "/" << kKMeansSeeds << "\n";
}

void call_budget(Check& c) {
  const auto corpus = load_corpus(gt_test::fixture("blobs40.jsonl"));
  gt_test::MockEnv env(json::parse(std::ifstream(gt_test::fixture("mock_blobs.json"))));
  PipelineConfig cfg;
  const auto run = run_topic_modeling(corpus, cfg, env.ctx);
  const auto& l = env.llm.ledger();
  const auto clusters = static_cast<std::int64_t>(run.clustering.k());
  const auto gen_assign = l.calls(CallSite::generation) + l.calls(CallSite::assignment);
  const auto core = gen_assign + l.calls(CallSite::refinement);
  const auto scorer = static_cast<double>(corpus.size() * run.topics.size());
  c.expect(clusters == 4, "clusters " + std::to_string(clusters));
  c.expect(gen_assign == 8, "generation+assignment " + std::to_string(gen_assign));
  c.expect(core <= 2 * clusters + static_cast<std::int64_t>(cfg.engine.refinement.max_merge_rounds),
           "core calls " + std::to_string(core));
  c.expect(static_cast<double>(l.total_calls()) < kScorerFraction * scorer,
           "ledger total " + std::to_string(l.total_calls()) + " vs scorer " + fmt(scorer));
  std::cout << "  ledger total " << l.total_calls() << ", per-(doc,topic) scorer " << scorer << "\n";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void end_to_end(Check& c) {
  gt_test::TempDir dir;
  const auto corpus = gt_test::fixture("blobs40.jsonl").string();
  auto once = [&](const std::string& tag) {
    const auto run_dir = (dir / tag).string();
    const std::vector<std::string> base = {"--config", gt_test::fixture("mock_config.ini").string(),
                                           "--mock", gt_test::fixture("mock_blobs.json").string(),
                                           "--cache-dir", (dir / (tag + "-cache")).string(),
                                           "--out", run_dir};
    for (std::vector<std::string> tail : {std::vector<std::string>{"model", corpus},
                                          std::vector<std::string>{"metrics", run_dir, corpus},
                                          std::vector<std::string>{"evaluate", run_dir, corpus}}) {
      auto args = base;
      args.insert(args.end(), tail.begin(), tail.end());
      std::ostringstream out, err;
      const int code = run_cli(args, out, err);
      c.expect(code == 0, tag + " " + tail[0] + " exited " + std::to_string(code) + ": " + err.str());
    }
    return std::filesystem::path(run_dir);
  };
  const auto a = once("a"), b = once("b");
  for (const char* f : {"topics.json", "assignments.jsonl", "metrics.json", "eval_report.json"})
    c.expect(!slurp(a / f).empty() && slurp(a / f) == slurp(b / f), std::string(f) + " differs");
  auto strip = [](json j) {
    j.erase("provenance");
    return j.dump();
  };
  c.expect(strip(json::parse(slurp(a / "run.json"))) == strip(json::parse(slurp(b / "run.json"))), "run.json differs");

  const auto m = json::parse(slurp(a / "metrics.json"));
  c.expect(m["p1"] == 1.0 && m["ari"] == 1.0 && m["nmi"] == 1.0, "metrics " + m.dump());
  const auto rep = json::parse(slurp(a / "eval_report.json"));
  const double la = rep["label_accuracy"].value("macro", -1.0);
  const double acc = rep["topic_accuracy"].value("mean", -1.0);
  const double comp = rep["topic_completeness"].value("mean", -1.0);
  c.expect(la == 1.0 && acc == 4.0 && comp == 4.0, "report (" + fmt(la) + ", " + fmt(acc) + ", " + fmt(comp) + ")");
  std::cout << "  report (" << la << ", " << acc << ", " << comp << ")\n";
}

// Counts the doctest cases and assertions executed, so an empty filter cannot pass silently.
struct CountingListener : doctest::IReporter {
  static inline int cases = 0;
  static inline int asserts = 0;
  explicit CountingListener(const doctest::ContextOptions&) {}
  void report_query(const doctest::QueryData&) override {}
  void test_run_start() override {}
  void test_run_end(const doctest::TestRunStats&) override {}
  void test_case_start(const doctest::TestCaseData&) override { ++cases; }
  void test_case_reenter(const doctest::TestCaseData&) override {}
  void test_case_end(const doctest::CurrentTestCaseStats&) override {}
  void test_case_exception(const doctest::TestCaseException&) override {}
  void subcase_start(const doctest::SubcaseSignature&) override {}
  void subcase_end() override {}
  void log_assert(const doctest::AssertData&) override { ++asserts; }
  void log_message(const doctest::MessageData&) override {}
  void test_case_skipped(const doctest::TestCaseData&) override {}
};
REGISTER_LISTENER("counting", 1, CountingListener);

void prompt_fidelity(Check& c) {
  doctest::Context ctx;
  ctx.setOption("source-file", "*test_prompts.cpp,*test_parsers.cpp");
  ctx.setOption("no-intro", true);
  ctx.setOption("no-version", true);
  ctx.setOption("minimal", true);
  const int rc = ctx.run();
  c.expect(rc == 0, "prompt or parser suite failed");
  c.expect(CountingListener::cases >= 10 && CountingListener::asserts >= 50,
           "only " + std::to_string(CountingListener::cases) + " cases ran");
  std::cout << "  " << CountingListener::cases << " cases, " << CountingListener::asserts << " assertions\n";
}

void refinement_conservation(Check& c) {
  std::mt19937_64 rng(314);
  int merged = 0;
  for (int sc = 0; sc < kRefineScenarios; ++sc) {
    const std::size_t n_topics = 2 + rng() % 10;
    std::vector<Topic> topics;
    for (std::size_t i = 0; i < n_topics; ++i)
      topics.push_back({"t" + std::to_string(i * 2 + rng() % 2), "Topic " + std::to_string(i), i, {}, {}});
    std::vector<TopicAssignment> as;
    const std::size_t n_docs = rng() % 50;
    for (std::size_t d = 0; d < n_docs; ++d) {
      const bool other = rng() % 6 == 0;
      as.push_back({"d" + std::to_string(d), other ? std::string(kOther) : topics[rng() % n_topics].id,
                    other ? AssignmentStage::other : AssignmentStage::generated});
    }
    // scripted rounds: random disjoint merges over the current count, possibly None
    json responses = json::array();
    std::size_t live = n_topics;
    const std::size_t rounds = 1 + rng() % 3;
    for (std::size_t r = 0; r < rounds; ++r) {
      if (live < 2 || rng() % 5 == 0) {
        responses.push_back("None");
        break;
      }
      std::vector<std::size_t> idx(live);
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      std::string text;
      std::size_t pos = 0, removed = 0;
      while (pos + 1 < idx.size() && rng() % 3 != 0) {
        const std::size_t size = std::min<std::size_t>(2 + rng() % 3, idx.size() - pos);
        text += "Merged " + std::to_string(r) + "_" + std::to_string(pos) + ": ";
        for (std::size_t k = 0; k < size; ++k) text += (k ? ", " : "") + std::to_string(idx[pos + k]);
        text += "\n";
        pos += size;
        removed += size - 1;
      }
      responses.push_back(text.empty() ? "None" : text);
      live -= removed;
      if (text.empty()) break;
    }
    gt_test::MockEnv env(json{{"rules", {{{"pattern", "merge topics"}, {"responses", responses}}}}});
    RefinementConfig cfg;
    cfg.max_merge_rounds = responses.size();
    const auto out = refine_topics(topics, as, cfg, {}, "", env.llm, env.prompts);
    const std::string tag = "scenario " + std::to_string(sc) + ": ";
    c.expect(out.assignments.size() == as.size(), tag + "assignment count changed");
    std::set<std::string> ids;
    for (const auto& t : out.topics) c.expect(ids.insert(t.id).second, tag + "duplicate topic id " + t.id);
    for (std::size_t i = 0; i < out.assignments.size() && i < as.size(); ++i) {
      const auto& a = out.assignments[i];
      c.expect(a.doc_id == as[i].doc_id, tag + "document order changed");
      c.expect(a.is_other() == as[i].is_other(), tag + "OTHER status changed");
      c.expect(a.is_other() || ids.contains(a.topic_id), tag + "dangling topic " + a.topic_id);
    }
    c.expect(out.failures.empty(), tag + "unexpected failure");
    merged += out.topics.size() < topics.size();
  }
  c.expect(merged >= kRefineScenarios / 2, "only " + std::to_string(merged) + " scenarios merged anything");
  std::cout << "  " << merged << "/" << kRefineScenarios << " scenarios merged topics\n";
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"metric oracle suite", metric_oracles},
      {"metric invariants", metric_invariants},
      {"k-means monotonicity, recovery and determinism", kmeans_criterion},
      {"call budget", call_budget},
      {"end-to-end determinism", end_to_end},
      {"prompt fidelity", prompt_fidelity},
      {"refinement conservation", refinement_conservation},
  };
  const std::string only = argc > 1 ? argv[1] : "";
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && name.find(only) == std::string::npos) continue;
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double s = Seconds(std::chrono::steady_clock::now() - t0).count();
    std::cout << (c.failures.empty() ? "PASS" : "FAIL") << "  " << name << "  (" << std::fixed << std::setprecision(3) << s
              << std::defaultfloat << " s)\n";
    for (const auto& f : c.failures) std::cout << "  - " << f << "\n";
    failed += !c.failures.empty();
  }
  return failed ? 1 : 0;
}
