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
#include "grantopic/cluster_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "grantopic/errors.hpp"

namespace grantopic {
namespace {

double choose2(std::int64_t x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

double entropy(const CountVector& sums, std::int64_t n) {
  double h = 0;
  for (Eigen::Index i = 0; i < sums.size(); ++i) {
    if (sums(i) == 0) continue;
    const double p = static_cast<double>(sums(i)) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

bool identical_partitions(const ContingencyTable& t) {
  for (Eigen::Index k = 0; k < t.counts.rows(); ++k)
    if (t.row_sums(k) && (t.counts.row(k).array() > 0).count() != 1) return false;
  for (Eigen::Index c = 0; c < t.counts.cols(); ++c)
    if (t.col_sums(c) && (t.counts.col(c).array() > 0).count() != 1) return false;
  return true;
}

}  // namespace

ContingencyTable contingency(const Clustering& u, const Clustering& v) {
  const auto& a = u.assignment();
  const auto& b = v.assignment();
  if (a.size() != b.size() || !std::equal(a.begin(), a.end(), b.begin(), [](auto& x, auto& y) { return x.first == y.first; })) {
    std::vector<std::string> diff;
    for (const auto& [id, _] : a)
      if (!b.contains(id)) diff.push_back(id);
    for (const auto& [id, _] : b)
      if (!a.contains(id)) diff.push_back(id);
    throw ValidationError("clusterings cover different documents", diff);
  }
  ContingencyTable t;
  t.counts = CountMatrix::Zero(static_cast<Eigen::Index>(u.k()), static_cast<Eigen::Index>(v.k()));
  auto ib = b.begin();
  for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib)
    ++t.counts(static_cast<Eigen::Index>(ia->second), static_cast<Eigen::Index>(ib->second));
  t.row_sums = t.counts.rowwise().sum();
  t.col_sums = t.counts.colwise().sum().transpose();
  t.n = t.counts.sum();
  return t;
}

double purity(const ContingencyTable& t) {
  if (t.n < 1) throw PreconditionError("purity needs at least one document");
  std::int64_t s = 0;
  for (Eigen::Index k = 0; k < t.counts.rows(); ++k) s += t.counts.row(k).maxCoeff();
  return static_cast<double>(s) / static_cast<double>(t.n);
}

double purity(const Clustering& u, const Clustering& v) { return purity(contingency(u, v)); }

double p1(const Clustering& u, const Clustering& v) {
  const auto t = contingency(u, v);
  const double puv = purity(t);
  ContingencyTable tt{t.counts.transpose(), t.col_sums, t.row_sums, t.n};
  const double pvu = purity(tt);
  if (puv + pvu == 0) return 0;
  return 2 * puv * pvu / (puv + pvu);
}

double ari(const ContingencyTable& t) {
  if (t.n < 2) throw PreconditionError("ARI needs at least two documents");
  double index = 0;
  for (Eigen::Index k = 0; k < t.counts.rows(); ++k)
    for (Eigen::Index c = 0; c < t.counts.cols(); ++c) index += choose2(t.counts(k, c));
  double sum_a = 0, sum_b = 0;
  for (Eigen::Index k = 0; k < t.row_sums.size(); ++k) sum_a += choose2(t.row_sums(k));
  for (Eigen::Index c = 0; c < t.col_sums.size(); ++c) sum_b += choose2(t.col_sums(c));
  const double expected = sum_a * sum_b / choose2(t.n);
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return identical_partitions(t) ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

double ari(const Clustering& u, const Clustering& v) { return ari(contingency(u, v)); }

double nmi(const ContingencyTable& t) {
  if (t.n < 1) throw PreconditionError("NMI needs at least one document");
  const double hu = entropy(t.row_sums, t.n);
  const double hv = entropy(t.col_sums, t.n);
  if (hu == 0 && hv == 0) return 1.0;
  if (hu == 0 || hv == 0) return 0.0;
  const double n = static_cast<double>(t.n);
  double mi = 0;
  for (Eigen::Index k = 0; k < t.counts.rows(); ++k)
    for (Eigen::Index c = 0; c < t.counts.cols(); ++c) {
      const auto nkc = t.counts(k, c);
      if (nkc == 0) continue;
      mi += static_cast<double>(nkc) / n *
            std::log(n * static_cast<double>(nkc) /
                     (static_cast<double>(t.row_sums(k)) * static_cast<double>(t.col_sums(c))));
    }
  return std::clamp(2 * mi / (hu + hv), 0.0, 1.0);
}

double nmi(const Clustering& u, const Clustering& v) { return nmi(contingency(u, v)); }

Clustering labels_to_clustering(std::span<const Document> docs) {
  std::vector<std::string> missing;
  std::map<std::string, std::size_t> index;
  std::map<std::string, std::size_t> assignment;
  for (const auto& d : docs) {
    if (!d.gold_label) {
      missing.push_back(d.id);
      continue;
    }
    auto [it, _] = index.emplace(*d.gold_label, index.size());
    assignment[d.id] = it->second;
  }
  if (!missing.empty()) throw ValidationError("documents without gold label", missing);
  return Clustering(std::move(assignment), std::max<std::size_t>(1, index.size()));
}

Clustering run_to_clustering(const TopicModelRun& run, bool drop_other) {
  std::map<std::string, std::size_t> index;
  std::map<std::string, std::size_t> assignment;
  for (const auto& a : run.assignments) {
    if (drop_other && a.is_other()) continue;
    auto [it, _] = index.emplace(a.topic_id, index.size());
    assignment[a.doc_id] = it->second;
  }
  return Clustering(std::move(assignment), std::max<std::size_t>(1, index.size()));
}

GoldMetrics evaluate_against_gold(const TopicModelRun& run, std::span<const Document> corpus, bool drop_other) {
  GoldMetrics m;
  std::set<std::string> kept;
  for (const auto& a : run.assignments) {
    if (drop_other && a.is_other()) {
      ++m.dropped_other;
      continue;
    }
    kept.insert(a.doc_id);
  }
  std::vector<Document> gold;
  for (const auto& d : corpus)
    if (kept.contains(d.id)) gold.push_back(d);
  const Clustering predicted = run_to_clustering(run, drop_other);
  const Clustering truth = labels_to_clustering(gold);
  const auto t = contingency(predicted, truth);
  m.p1 = p1(predicted, truth);
  m.ari = t.n >= 2 ? ari(t) : 1.0;
  m.nmi = nmi(t);
  m.n_docs = static_cast<std::size_t>(t.n);
  std::set<std::string> topics;
  for (const auto& a : run.assignments)
    if (!a.is_other()) topics.insert(a.topic_id);
  m.n_topics = topics.size();
  return m;
}

nlohmann::json to_json(const GoldMetrics& m) {
  return {{"p1", m.p1},           {"ari", m.ari},       {"nmi", m.nmi},
          {"n_topics", m.n_topics}, {"n_docs", m.n_docs}, {"dropped_other", m.dropped_other}};
}

}  // namespace grantopic
