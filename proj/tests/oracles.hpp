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

// Independent reference implementations used only by tests. They work on raw label
// vectors and never touch the library's contingency code.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <utility>
#include <vector>

namespace gt_oracle {

/// Pair-enumeration ARI: classify every document pair, then apply the expected-index formula.
inline double ari_pairs(const std::vector<int>& u, const std::vector<int>& v) {
  const std::size_t n = u.size();
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool su = u[i] == u[j], sv = v[i] == v[j];
      if (su && sv) n11 += 1;
      else if (su) n10 += 1;
      else if (sv) n01 += 1;
      else n00 += 1;
    }
  const double pairs = n11 + n10 + n01 + n00;
  const double same_u = n11 + n10, same_v = n11 + n01;
  const double expected = same_u * same_v / pairs;
  const double max_index = 0.5 * (same_u + same_v);
  if (max_index == expected) return (n10 == 0 && n01 == 0) ? 1.0 : 0.0;
  return (n11 - expected) / (max_index - expected);
}

/// Rand index from the same pair classification.
inline double rand_index_pairs(const std::vector<int>& u, const std::vector<int>& v) {
  double agree = 0, pairs = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j) {
      pairs += 1;
      agree += (u[i] == u[j]) == (v[i] == v[j]);
    }
  return agree / pairs;
}

/// Plug-in entropy NMI from raw joint counts.
inline double nmi_plugin(const std::vector<int>& u, const std::vector<int>& v) {
  const double n = static_cast<double>(u.size());
  std::map<std::pair<int, int>, int> joint;
  std::map<int, int> cu, cv;
  for (std::size_t i = 0; i < u.size(); ++i) {
    ++joint[{u[i], v[i]}];
    ++cu[u[i]];
    ++cv[v[i]];
  }
  double hu = 0, hv = 0, mi = 0;
  for (auto [_, c] : cu) hu -= c / n * std::log(c / n);
  for (auto [_, c] : cv) hv -= c / n * std::log(c / n);
  for (auto [key, c] : joint) mi += c / n * std::log(n * c / (static_cast<double>(cu[key.first]) * cv[key.second]));
  if (hu + hv == 0) return 1.0;
  if (hu == 0 || hv == 0) return 0.0;
  return 2 * mi / (hu + hv);
}

/// Purity by direct counting: for each cluster of u, the size of its most common v label.
inline double purity_count(const std::vector<int>& u, const std::vector<int>& v) {
  std::map<int, std::map<int, int>> by_cluster;
  for (std::size_t i = 0; i < u.size(); ++i) ++by_cluster[u[i]][v[i]];
  double total = 0;
  for (const auto& [_, labels] : by_cluster) {
    int best = 0;
    for (auto [__, c] : labels) best = std::max(best, c);
    total += best;
  }
  return total / static_cast<double>(u.size());
}

inline double p1_count(const std::vector<int>& u, const std::vector<int>& v) {
  const double a = purity_count(u, v), b = purity_count(v, u);
  return a + b == 0 ? 0 : 2 * a * b / (a + b);
}

/// Lowest-SSE split of 1-D points into two nonempty groups by trying every bipartition.
/// Returns (mask of points in the group containing point 0, sse).
inline std::pair<std::uint32_t, double> best_two_partition(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::uint32_t best_mask = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << n) - 1; ++mask) {
    if (!(mask & 1u)) continue;  // point 0 always in the first group
    double s[2] = {0, 0}, c[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const int g = (mask >> i) & 1u ? 0 : 1;
      s[g] += x[i];
      c[g] += 1;
    }
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int g = (mask >> i) & 1u ? 0 : 1;
      const double d = x[i] - s[g] / c[g];
      sse += d * d;
    }
    if (sse < best) {
      best = sse;
      best_mask = mask;
    }
  }
  return {best_mask, best};
}

/// Random labels for n documents over at most k clusters.
inline std::vector<int> random_labels(std::size_t n, int k, std::mt19937_64& rng) {
  std::vector<int> out(n);
  for (auto& l : out) l = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
  return out;
}

/// Labels compacted to 0..K-1 in first-appearance order (needed before building a Clustering).
inline std::vector<int> compact(const std::vector<int>& labels) {
  std::map<int, int> ids;
  std::vector<int> out;
  for (int l : labels) out.push_back(ids.emplace(l, static_cast<int>(ids.size())).first->second);
  return out;
}

}  // namespace gt_oracle
