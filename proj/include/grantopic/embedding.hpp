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
#include <atomic>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "grantopic/errors.hpp"

namespace grantopic {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Row-major so that each row (one embedding) is contiguous.
template <typename Scalar>
using EmbeddingMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Embeddings = EmbeddingMatrix<double>;

/// Cosine similarity of two equally sized, nonzero vectors, clamped to [-1, 1].
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size())
    throw PreconditionError("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) throw PreconditionError("cosine similarity of a zero vector");
  const Scalar c = a.dot(b) / (na * nb);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

/// Indices of the min(k, rows) rows of `candidates` most similar to `query`, by
/// non-increasing cosine similarity; equal similarities keep row order.
template <typename DerivedQ, typename DerivedC>
std::vector<std::size_t> top_k_similar(const Eigen::MatrixBase<DerivedQ>& query,
                                       const Eigen::MatrixBase<DerivedC>& candidates, std::size_t k) {
  using Scalar = typename DerivedQ::Scalar;
  if (k < 1) throw PreconditionError("top_k_similar needs k >= 1");
  if (candidates.rows() == 0) throw PreconditionError("top_k_similar needs at least one candidate");
  if (candidates.cols() != query.size())
    throw PreconditionError("dimension mismatch: " + std::to_string(query.size()) + " vs " +
                            std::to_string(candidates.cols()));
  std::vector<Scalar> sim(static_cast<std::size_t>(candidates.rows()));
  for (Eigen::Index i = 0; i < candidates.rows(); ++i)
    sim[static_cast<std::size_t>(i)] = cosine_similarity(query, candidates.row(i).transpose());
  std::vector<std::size_t> order(sim.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sim[x] > sim[y]; });
  order.resize(std::min(k, order.size()));
  return order;
}

/// Scales each row to unit L2 norm. Throws on zero or non-finite rows.
template <typename Derived>
void normalize_rows(Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!m.row(i).allFinite()) throw PreconditionError("non-finite embedding at row " + std::to_string(i));
    const auto n = m.row(i).norm();
    if (n == 0) throw PreconditionError("zero embedding at row " + std::to_string(i));
    m.row(i) /= n;
  }
}

/// Text to vector mapping. Implementations must be deterministic per instance and
/// safe to call from several threads.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  /// Raw (not yet normalized) vectors, one row per text, in input order.
  virtual Embeddings embed_raw(const std::vector<std::string>& texts) = 0;
};

/// Feature-hashing embedder over character n-grams. Offline and reproducible.
class HashingEmbedder final : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(std::size_t dim = 256, std::size_t ngram = 3);
  std::string name() const override { return "hashing-char" + std::to_string(ngram_) + "gram"; }
  std::size_t dim() const override { return dim_; }
  Embeddings embed_raw(const std::vector<std::string>& texts) override;

 private:
  std::size_t dim_;
  std::size_t ngram_;
};

struct HttpEmbedderOptions {
  std::string base_url;  // e.g. "http://127.0.0.1:8080/v1/embeddings"
  std::string model;
  std::string api_key_env;  // name of the env var holding the bearer token; empty for none
  std::size_t dim = 0;      // 0: learned from the first response
  std::size_t batch_size = 64;
  int timeout_s = 60;
};

/// Remote endpoint speaking {"model", "input": [...]} -> {"data": [{"index", "embedding"}]}.
class HttpEmbedder final : public EmbeddingProvider {
 public:
  explicit HttpEmbedder(HttpEmbedderOptions opts);
  std::string name() const override { return "http:" + opts_.model; }
  std::size_t dim() const override;
  Embeddings embed_raw(const std::vector<std::string>& texts) override;

 private:
  HttpEmbedderOptions opts_;
  std::atomic<std::size_t> dim_;
};

/// Embeds `texts` in order and L2-normalizes every row. Texts must be nonempty.
Embeddings embed_batch(EmbeddingProvider& provider, const std::vector<std::string>& texts);

}  // namespace grantopic
