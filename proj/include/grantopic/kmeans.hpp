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

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grantopic/embedding.hpp"
#include "grantopic/errors.hpp"
#include "grantopic/model.hpp"

namespace grantopic {

struct KMeansConfig {
  std::optional<std::size_t> k;
  std::size_t target_cluster_size = 10;
  std::size_t max_iter = 100;
  double tol = 1e-4;  // stop when (prev_sse - sse) <= tol * prev_sse
  std::uint64_t seed = 42;

  void validate() const;
};

template <typename Scalar>
struct KMeansResult {
  Clustering clustering;
  std::vector<std::size_t> labels;  // cluster index per input row
  EmbeddingMatrix<Scalar> centroids;
  Scalar sse = 0;
  std::size_t iterations_run = 0;
  /// SSE after each assignment step; non-increasing.
  std::vector<Scalar> sse_history;
};

/// cfg.k when set, else ceil(n_docs / target_cluster_size); clamped to [1, n_docs].
std::size_t choose_k(std::size_t n_docs, const KMeansConfig& cfg);

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; independent of the standard library's distributions.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Index drawn with probability proportional to d2 (zero-weight rows never drawn), or n if all are zero.
inline std::size_t sample_d2(const std::vector<double>& d2, double total, std::mt19937_64& rng) {
  const std::size_t n = d2.size();
  if (!(total > 0)) return n;
  const double target = unit_uniform(rng) * total;
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += d2[i];
    if (d2[i] > 0 && acc > target) return i;
  }
  for (std::size_t i = n; i-- > 0;)  // rounding at the tail
    if (d2[i] > 0) return i;
  return n;
}

/// Greedy k-means++: each new center is the best (lowest resulting potential) of
/// 2 + floor(ln k) D^2-sampled candidates.
template <typename Scalar>
EmbeddingMatrix<Scalar> kmeanspp_seed(const EmbeddingMatrix<Scalar>& x, std::size_t k, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  EmbeddingMatrix<Scalar> c(static_cast<Eigen::Index>(k), x.cols());
  std::vector<bool> used(n, false);
  auto dist_to = [&](std::size_t p) {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i)
      d[i] = static_cast<double>((x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(p))).squaredNorm());
    return d;
  };
  std::size_t first = static_cast<std::size_t>(rng() % n);
  c.row(0) = x.row(static_cast<Eigen::Index>(first));
  used[first] = true;
  std::vector<double> d2 = dist_to(first);
  for (std::size_t j = 1; j < k; ++j) {
    double total = 0;
    for (double d : d2) total += d;
    std::size_t pick = n;
    std::vector<double> best_d2;
    double best_pot = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t cand = sample_d2(d2, total, rng);
      if (cand == n) break;
      auto dc = dist_to(cand);
      double pot = 0;
      for (std::size_t i = 0; i < n; ++i) pot += (dc[i] = std::min(dc[i], d2[i]));
      if (pot < best_pot) {
        best_pot = pot;
        pick = cand;
        best_d2 = std::move(dc);
      }
    }
    if (pick == n) {  // every remaining point coincides with a center
      for (std::size_t i = 0; i < n; ++i)
        if (!used[i]) {
          pick = i;
          break;
        }
      best_d2 = dist_to(pick);
      for (std::size_t i = 0; i < n; ++i) best_d2[i] = std::min(best_d2[i], d2[i]);
    }
    used[pick] = true;
    c.row(static_cast<Eigen::Index>(j)) = x.row(static_cast<Eigen::Index>(pick));
    d2 = std::move(best_d2);
  }
  return c;
}

/// Nearest-centroid assignment (lowest index wins ties). Returns whether any label changed.
template <typename Scalar>
bool assign_nearest(const EmbeddingMatrix<Scalar>& x, const EmbeddingMatrix<Scalar>& c,
                    std::vector<std::size_t>& labels, std::vector<Scalar>& dist) {
  bool changed = false;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    std::size_t arg = 0;
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      const Scalar d = (x.row(i) - c.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<std::size_t>(j);
      }
    }
    const auto ui = static_cast<std::size_t>(i);
    if (labels[ui] != arg) changed = true;
    labels[ui] = arg;
    dist[ui] = best;
  }
  return changed;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding under squared Euclidean distance.
///
/// Row i of `points` belongs to `doc_ids[i]`. Clusters that lose every member are
/// reseeded to the point farthest from its current centroid, so k is preserved
/// whenever the data has at least k distinct points. Deterministic for a given seed.
template <typename Scalar>
KMeansResult<Scalar> kmeans_fit(std::span<const std::string> doc_ids, const EmbeddingMatrix<Scalar>& points,
                                const KMeansConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) throw PreconditionError("kmeans_fit needs at least one point");
  if (doc_ids.size() != n)
    throw PreconditionError("kmeans_fit: " + std::to_string(doc_ids.size()) + " ids for " + std::to_string(n) +
                            " points");
  if (!points.allFinite()) throw PreconditionError("kmeans_fit: non-finite vector values");
  const std::size_t k = cfg.k ? *cfg.k : choose_k(n, cfg);
  if (k > n)
    throw PreconditionError("kmeans_fit: k=" + std::to_string(k) + " exceeds number of points " + std::to_string(n));

  std::mt19937_64 rng(cfg.seed);
  KMeansResult<Scalar> r;
  r.centroids = detail::kmeanspp_seed(points, k, rng);
  r.labels.assign(n, k);  // k marks "unassigned" so the first pass counts as a change
  std::vector<Scalar> dist(n);

  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    bool changed = detail::assign_nearest(points, r.centroids, r.labels, dist);
    // Reseed empty clusters; each pass fills at least one unless points coincide.
    for (std::size_t pass = 0; pass < k; ++pass) {
      std::vector<std::size_t> count(k, 0);
      for (auto l : r.labels) ++count[l];
      bool any_empty = false;
      for (std::size_t j = 0; j < k; ++j) any_empty |= count[j] == 0;
      if (!any_empty) break;
      bool moved = false;
      for (std::size_t j = 0; j < k; ++j) {
        if (count[j] != 0) continue;
        std::size_t far = n;
        for (std::size_t i = 0; i < n; ++i)
          if (count[r.labels[i]] > 1 && dist[i] > 0 && (far == n || dist[i] > dist[far])) far = i;
        if (far == n) continue;
        --count[r.labels[far]];
        r.labels[far] = j;
        dist[far] = 0;
        count[j] = 1;
        r.centroids.row(static_cast<Eigen::Index>(j)) = points.row(static_cast<Eigen::Index>(far));
        moved = true;
      }
      if (!moved) break;
      detail::assign_nearest(points, r.centroids, r.labels, dist);
      changed = true;
    }

    Scalar sse = 0;
    for (auto d : dist) sse += d;
    r.iterations_run = it;
    if (!r.sse_history.empty()) {
      const Scalar prev = r.sse_history.back();
      // Lloyd steps never increase SSE; allow for summation rounding.
      assert(sse <= prev + Scalar(1e-9) * (Scalar(1) + prev));
      r.sse_history.push_back(sse);
      if (!changed || prev - sse <= static_cast<Scalar>(cfg.tol) * prev) break;
    } else {
      r.sse_history.push_back(sse);
    }
    if (it == cfg.max_iter) break;

    // Centroid update, summing in row order.
    EmbeddingMatrix<Scalar> sums = EmbeddingMatrix<Scalar>::Zero(static_cast<Eigen::Index>(k), points.cols());
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(r.labels[i])) += points.row(static_cast<Eigen::Index>(i));
      ++count[r.labels[i]];
    }
    for (std::size_t j = 0; j < k; ++j)
      if (count[j] > 0)
        r.centroids.row(static_cast<Eigen::Index>(j)) = sums.row(static_cast<Eigen::Index>(j)) / Scalar(count[j]);
  }

  r.sse = r.sse_history.back();
  std::map<std::string, std::size_t> assignment;
  for (std::size_t i = 0; i < n; ++i) assignment.emplace(doc_ids[i], r.labels[i]);
  if (assignment.size() != n) throw PreconditionError("kmeans_fit: duplicate document ids");
  r.clustering = Clustering(std::move(assignment), k);
  return r;
}

}  // namespace grantopic
