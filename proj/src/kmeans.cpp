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
#include "grantopic/kmeans.hpp"

namespace grantopic {

void KMeansConfig::validate() const {
  std::vector<std::string> bad;
  if (k && *k < 1) bad.push_back("clustering.k");
  if (target_cluster_size < 2) bad.push_back("clustering.target_cluster_size");
  if (max_iter < 1) bad.push_back("clustering.max_iter");
  if (!(tol > 0)) bad.push_back("clustering.tol");
  if (!bad.empty()) throw ValidationError("invalid k-means configuration", bad);
}

std::size_t choose_k(std::size_t n_docs, const KMeansConfig& cfg) {
  if (n_docs < 1) throw PreconditionError("choose_k needs n_docs >= 1");
  std::size_t k = cfg.k ? *cfg.k : (n_docs + cfg.target_cluster_size - 1) / cfg.target_cluster_size;
  return std::clamp<std::size_t>(k, 1, n_docs);
}

}  // namespace grantopic
