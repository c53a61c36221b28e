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
#include "grantopic/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "grantopic/errors.hpp"
#include "grantopic/parsers.hpp"

using nlohmann::json;

namespace grantopic {
namespace {

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      if (s[i + 1] == 'n') { out += '\n'; ++i; continue; }
      if (s[i + 1] == '\\') { out += '\\'; ++i; continue; }
    }
    out += s[i];
  }
  return out;
}

template <typename T>
T parse_number(const std::string& s) {
  T v{};
  const auto t = trim(s);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) throw std::invalid_argument("not a valid number: '" + s + "'");
  return v;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  const auto t = trim(s);
  double v = 0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != t.size()) throw std::invalid_argument("not a valid number: '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s) {
  const auto t = to_lower(trim(s));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

std::string one_of(const std::string& s, std::initializer_list<std::string_view> allowed) {
  const auto t = trim(s);
  for (auto a : allowed)
    if (t == a) return t;
  std::string msg = "expected one of";
  for (auto a : allowed) msg += " " + std::string(a);
  throw std::invalid_argument(msg + ", got '" + s + "'");
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<json(const RunConfig&)> get;
};

#define GT_FIELD(KEY, MEMBER, PARSE) \
  {KEY, {[](RunConfig& c, const std::string& v) { c.MEMBER = PARSE(v); }, [](const RunConfig& c) { return json(c.MEMBER); }}}
#define GT_STR(KEY, MEMBER) GT_FIELD(KEY, MEMBER, unescape)
#define GT_SIZE(KEY, MEMBER) GT_FIELD(KEY, MEMBER, parse_number<std::size_t>)
#define GT_INT(KEY, MEMBER) GT_FIELD(KEY, MEMBER, parse_number<int>)
#define GT_U64(KEY, MEMBER) GT_FIELD(KEY, MEMBER, parse_number<std::uint64_t>)
#define GT_DBL(KEY, MEMBER) GT_FIELD(KEY, MEMBER, parse_double)
#define GT_BOOL(KEY, MEMBER) GT_FIELD(KEY, MEMBER, parse_bool)

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      GT_U64("seed", seed),
      GT_STR("output_dir", output_dir),

      {"llm.provider", {[](RunConfig& c, const std::string& v) { c.llm.provider = one_of(v, {"http", "mock"}); },
                        [](const RunConfig& c) { return json(c.llm.provider); }}},
      GT_STR("llm.model", llm.gateway.model),
      GT_DBL("llm.temperature", llm.gateway.temperature),
      GT_INT("llm.max_tokens", llm.gateway.max_tokens),
      GT_INT("llm.retries", llm.gateway.retries),
      {"llm.backoff_ms",
       {[](RunConfig& c, const std::string& v) {
          c.llm.gateway.backoff_base = std::chrono::milliseconds(parse_number<std::int64_t>(v));
        },
        [](const RunConfig& c) { return json(c.llm.gateway.backoff_base.count()); }}},
      GT_SIZE("llm.max_concurrency", llm.gateway.max_concurrency),
      GT_DBL("llm.rate_limit_per_sec", llm.gateway.rate_limit_per_sec),
      {"llm.cache_dir",
       {[](RunConfig& c, const std::string& v) {
          const auto t = trim(v);
          if (t.empty()) c.llm.gateway.cache_dir.reset();
          else c.llm.gateway.cache_dir = std::filesystem::path(t);
        },
        [](const RunConfig& c) { return c.llm.gateway.cache_dir ? json(c.llm.gateway.cache_dir->string()) : json(""); }}},
      GT_STR("llm.mock_script", llm.mock_script),
      GT_STR("llm.base_url", llm.http.base_url),
      GT_STR("llm.api_key_env", llm.http.api_key_env),
      GT_INT("llm.timeout_s", llm.http.timeout_s),

      {"embedding.provider",
       {[](RunConfig& c, const std::string& v) { c.embedding.provider = one_of(v, {"hash", "http"}); },
        [](const RunConfig& c) { return json(c.embedding.provider); }}},
      GT_SIZE("embedding.dim", embedding.dim),
      GT_SIZE("embedding.ngram", embedding.ngram),
      GT_STR("embedding.model", embedding.http.model),
      GT_STR("embedding.base_url", embedding.http.base_url),
      GT_STR("embedding.api_key_env", embedding.http.api_key_env),
      GT_SIZE("embedding.batch_size", embedding.http.batch_size),
      GT_INT("embedding.timeout_s", embedding.http.timeout_s),
      {"embedding.similarity", {[](RunConfig&, const std::string& v) { one_of(v, {"cosine"}); },
                                [](const RunConfig&) { return json("cosine"); }}},

      {"clustering.k",
       {[](RunConfig& c, const std::string& v) {
          const auto t = trim(v);
          if (t.empty() || to_lower(t) == "auto") c.pipeline.clustering.k.reset();
          else c.pipeline.clustering.k = parse_number<std::size_t>(t);
        },
        [](const RunConfig& c) { return c.pipeline.clustering.k ? json(*c.pipeline.clustering.k) : json("auto"); }}},
      GT_SIZE("clustering.target_cluster_size", pipeline.clustering.target_cluster_size),
      GT_SIZE("clustering.max_iter", pipeline.clustering.max_iter),
      GT_DBL("clustering.tol", pipeline.clustering.tol),
      GT_U64("clustering.seed", pipeline.clustering.seed),

      GT_BOOL("summarize.enabled", pipeline.summarize),
      GT_SIZE("summarize.min_words", pipeline.summarization.min_words_to_summarize),
      GT_SIZE("summarize.truncate_chars", pipeline.summarization.truncate_chars),

      GT_SIZE("engine.min_topic_size", pipeline.engine.refinement.min_topic_size),
      GT_SIZE("engine.max_merge_rounds", pipeline.engine.refinement.max_merge_rounds),
      GT_BOOL("engine.combined_call", pipeline.engine.combined_call),
      GT_BOOL("engine.global_assignment", pipeline.engine.global_assignment),
      GT_SIZE("engine.max_doc_chars", pipeline.engine.max_doc_chars),
      GT_BOOL("engine.include_other_in_export", include_other_in_export),

      GT_SIZE("hierarchy.target_cluster_size", hierarchy.target_cluster_size),
      GT_U64("hierarchy.seed", hierarchy.seed),

      GT_SIZE("label_accuracy.n_samples_per_topic", eval.label_accuracy.n_samples_per_topic),
      GT_SIZE("label_accuracy.top_k", eval.label_accuracy.top_k),
      GT_U64("label_accuracy.seed", eval.label_accuracy.seed),
      GT_BOOL("label_accuracy.shuffle", eval.label_accuracy.shuffle_candidates),
      {"label_accuracy.topic_embedding",
       {[](RunConfig& c, const std::string& v) {
          c.eval.label_accuracy.topic_embedding =
              one_of(v, {"name", "centroid"}) == "name" ? TopicEmbedding::name : TopicEmbedding::centroid;
        },
        [](const RunConfig& c) {
          return json(c.eval.label_accuracy.topic_embedding == TopicEmbedding::name ? "name" : "centroid");
        }}},

      GT_SIZE("evaluate.sample_cap", eval.sample_cap),
      GT_U64("evaluate.seed", eval.seed),

      GT_STR("prompts.dir", prompts_dir),
      GT_STR("prompts.topic_generation_examples", pipeline.engine.topic_generation_examples),
      GT_STR("prompts.topic_merge_examples", pipeline.engine.topic_merge_examples),
      GT_STR("prompts.parent_topic_examples", hierarchy.parent_topic_examples),

      GT_STR("business.domain_description", pipeline.business.domain_description),
      GT_STR("business.topic_description", pipeline.business.topic_description),
      GT_STR("business.topic_definition", pipeline.business.topic_definition),
  };
  return table;
}

#undef GT_FIELD
#undef GT_STR
#undef GT_SIZE
#undef GT_INT
#undef GT_U64
#undef GT_DBL
#undef GT_BOOL

void flatten(const boost::property_tree::ptree& tree, std::vector<std::pair<std::string, std::string>>& out) {
  for (const auto& [section, node] : tree) {
    if (node.empty()) {
      out.emplace_back(section, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) out.emplace_back(section + "." + key, leaf.data());
  }
}

template <typename Fn>
void collect(std::vector<std::string>& errors, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    errors.insert(errors.end(), e.items().begin(), e.items().end());
  }
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : fields()) keys.push_back(k);
  return keys;
}

RunConfig load_config(const std::optional<std::filesystem::path>& file, std::span<const std::string> overrides) {
  std::vector<std::pair<std::string, std::string>> entries;
  if (file) {
    if (!std::filesystem::exists(*file)) throw IoError("config file not found: " + file->string());
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(file->string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ParseError("config " + file->string() + ": " + e.message(), static_cast<int>(e.line()));
    }
    flatten(tree, entries);
  }
  std::vector<std::string> errors;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      errors.push_back(o + " (override must be key=value)");
      continue;
    }
    entries.emplace_back(trim(o.substr(0, eq)), o.substr(eq + 1));
  }

  RunConfig cfg;
  std::set<std::string> explicit_keys;
  const auto& table = fields();
  for (const auto& [key, value] : entries) {
    auto it = table.find(key);
    if (it == table.end()) {
      errors.push_back(key + " (unknown key)");
      continue;
    }
    try {
      it->second.set(cfg, value);
      explicit_keys.insert(key);
    } catch (const std::exception& e) {
      errors.push_back(key + " (" + e.what() + ")");
    }
  }

  // Per-stage seeds follow the top-level seed unless pinned.
  if (!explicit_keys.contains("clustering.seed")) cfg.pipeline.clustering.seed = cfg.seed;
  if (!explicit_keys.contains("hierarchy.seed")) cfg.hierarchy.seed = cfg.seed;
  if (!explicit_keys.contains("label_accuracy.seed")) cfg.eval.label_accuracy.seed = cfg.seed;
  if (!explicit_keys.contains("evaluate.seed")) cfg.eval.seed = cfg.seed;
  cfg.pipeline.summarization.business = cfg.pipeline.business;
  cfg.eval.business = cfg.pipeline.business;

  collect(errors, [&] { cfg.pipeline.clustering.validate(); });
  collect(errors, [&] { cfg.pipeline.summarization.validate(); });
  collect(errors, [&] { cfg.pipeline.engine.refinement.validate(); });
  collect(errors, [&] { cfg.eval.label_accuracy.validate(); });
  if (cfg.pipeline.engine.max_doc_chars == 0) errors.push_back("engine.max_doc_chars");
  if (cfg.hierarchy.target_cluster_size == 0) errors.push_back("hierarchy.target_cluster_size");
  if (cfg.eval.sample_cap == 0) errors.push_back("evaluate.sample_cap");
  if (cfg.llm.gateway.retries < 0) errors.push_back("llm.retries");
  if (cfg.llm.gateway.max_tokens < 1) errors.push_back("llm.max_tokens");
  if (cfg.llm.gateway.max_concurrency < 1) errors.push_back("llm.max_concurrency");
  if (cfg.llm.gateway.rate_limit_per_sec < 0) errors.push_back("llm.rate_limit_per_sec");
  if (cfg.llm.provider == "mock" && cfg.llm.mock_script.empty()) errors.push_back("llm.mock_script (required for mock)");
  if (cfg.embedding.provider == "hash" && (cfg.embedding.dim == 0 || cfg.embedding.ngram == 0))
    errors.push_back("embedding.dim/embedding.ngram");
  if (!errors.empty()) throw ValidationError("invalid configuration", errors);

  cfg.pipeline.snapshot = cfg.snapshot();
  return cfg;
}

json RunConfig::snapshot() const {
  json out = json::object();
  for (const auto& [key, field] : fields()) {
    // Output locations do not affect results; they are recorded as run provenance instead.
    if (key == "output_dir" || key == "llm.cache_dir") continue;
    const auto dot = key.find('.');
    if (dot == std::string::npos) out[key] = field.get(*this);
    else out[key.substr(0, dot)][key.substr(dot + 1)] = field.get(*this);
  }
  return out;
}

}  // namespace grantopic
