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
#include "grantopic/embedding.hpp"

#include <cctype>

#include "grantopic/hash.hpp"

namespace grantopic {

HashingEmbedder::HashingEmbedder(std::size_t dim, std::size_t ngram) : dim_(dim), ngram_(ngram) {
  if (dim_ == 0) throw PreconditionError("embedding dim must be > 0");
  if (ngram_ == 0) throw PreconditionError("n-gram length must be > 0");
}

Embeddings HashingEmbedder::embed_raw(const std::vector<std::string>& texts) {
  Embeddings out = Embeddings::Zero(static_cast<Eigen::Index>(texts.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t r = 0; r < texts.size(); ++r) {
    // Pad so short texts still yield at least one n-gram; fold ASCII case and whitespace runs.
    std::string s = " ";
    for (unsigned char c : texts[r]) {
      if (std::isspace(c)) {
        if (s.back() != ' ') s += ' ';
      } else {
        s += static_cast<char>(std::tolower(c));
      }
    }
    if (s.back() != ' ') s += ' ';
    while (s.size() < ngram_) s += ' ';
    for (std::size_t i = 0; i + ngram_ <= s.size(); ++i) {
      const auto h = fnv1a64(std::string_view(s).substr(i, ngram_));
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(h % dim_)) += 1.0;
    }
  }
  return out;
}

Embeddings embed_batch(EmbeddingProvider& provider, const std::vector<std::string>& texts) {
  if (texts.empty()) throw PreconditionError("embed_batch needs at least one text");
  for (std::size_t i = 0; i < texts.size(); ++i)
    if (texts[i].empty()) throw PreconditionError("empty text at index " + std::to_string(i));
  Embeddings m = provider.embed_raw(texts);
  if (static_cast<std::size_t>(m.rows()) != texts.size())
    throw TransportError("embedding provider returned " + std::to_string(m.rows()) + " vectors for " +
                         std::to_string(texts.size()) + " texts");
  normalize_rows(m);
  return m;
}

}  // namespace grantopic
