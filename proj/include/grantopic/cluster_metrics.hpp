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
#include <span>

#include <Eigen/Dense>
#include <json.hpp>

#include "grantopic/model.hpp"

namespace grantopic {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// counts(k, c) = |docs in cluster k of u and cluster c of v|.
struct ContingencyTable {
  CountMatrix counts;
  CountVector row_sums;
  CountVector col_sums;
  std::int64_t n = 0;
};

/// Throws ValidationError listing the symmetric difference when the id sets differ.
ContingencyTable contingency(const Clustering& u, const Clustering& v);

double purity(const ContingencyTable& t);
double purity(const Clustering& u, const Clustering& v);

/// Harmonic mean of purity(u, v) and purity(v, u).
double p1(const Clustering& u, const Clustering& v);

/// Adjusted Rand index in pair-count form. Needs n >= 2. When the maximum index equals
/// the expected index (both partitions trivial) the result is 1 for identical partitions, else 0.
double ari(const ContingencyTable& t);
double ari(const Clustering& u, const Clustering& v);

/// 2 I(U,V) / (H_U + H_V), natural log. Both entropies zero gives 1.
double nmi(const ContingencyTable& t);
double nmi(const Clustering& u, const Clustering& v);

/// Gold labels to cluster indices in first-appearance order. Throws listing docs without a label.
Clustering labels_to_clustering(std::span<const Document> docs);

/// Partition induced by a run's assignments: one cluster per topic, OTHER as its own cluster
/// unless `drop_other`, in which case OTHER documents are left out.
Clustering run_to_clustering(const TopicModelRun& run, bool drop_other);

struct GoldMetrics {
  double p1 = 0;
  double ari = 0;
  double nmi = 0;
  std::size_t n_topics = 0;
  std::size_t n_docs = 0;
  std::size_t dropped_other = 0;
};

/// Compares a run with the gold labels of `corpus` (restricted to the run's documents).
GoldMetrics evaluate_against_gold(const TopicModelRun& run, std::span<const Document> corpus, bool drop_other);
nlohmann::json to_json(const GoldMetrics& m);

}  // namespace grantopic
