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
#include <cstdlib>
#include <utility>

#include "grantopic/embedding.hpp"
#include "grantopic/errors.hpp"
#include "grantopic/llm_gateway.hpp"

// httplib after Eigen: its system headers break Eigen if included first.
#include <httplib.h>

using nlohmann::json;

namespace grantopic {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw PreconditionError("URL without scheme: '" + url + "'");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

httplib::Headers auth_headers(const std::string& env) {
  httplib::Headers h;
  if (env.empty()) return h;
  const char* token = std::getenv(env.c_str());
  if (!token || !*token) throw PreconditionError("environment variable '" + env + "' is not set");
  h.emplace("Authorization", std::string("Bearer ") + token);
  return h;
}

json post_json(const std::string& url, const std::string& key_env, int timeout_s, const json& body) {
  const auto ep = split_url(url);
  httplib::Client cli(ep.origin);
  cli.set_connection_timeout(timeout_s, 0);
  cli.set_read_timeout(timeout_s, 0);
  cli.set_write_timeout(timeout_s, 0);
  auto res = cli.Post(ep.path, auth_headers(key_env), body.dump(), "application/json");
  if (!res) throw TransportError("POST " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) throw ProviderError(res->status, res->body.substr(0, 500));
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw TransportError("POST " + url + " returned invalid JSON: " + e.what());
  }
}

}  // namespace

HttpChatProvider::HttpChatProvider(HttpChatOptions opts) : opts_(std::move(opts)) {
  split_url(opts_.base_url);
}

std::string HttpChatProvider::complete(const LlmRequest& req) {
  json messages = json::array();
  if (req.system) messages.push_back({{"role", "system"}, {"content", *req.system}});
  messages.push_back({{"role", "user"}, {"content", req.user}});
  json body = {{"model", req.model},
               {"messages", messages},
               {"temperature", req.temperature},
               {"max_tokens", req.max_tokens}};
  json res = post_json(opts_.base_url, opts_.api_key_env, opts_.timeout_s, body);
  try {
    const auto& content = res.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("unexpected chat response shape: ") + e.what());
  }
}

HttpEmbedder::HttpEmbedder(HttpEmbedderOptions opts) : opts_(std::move(opts)), dim_(opts_.dim) {
  split_url(opts_.base_url);
  if (opts_.batch_size == 0) throw PreconditionError("embedding batch size must be > 0");
}

std::size_t HttpEmbedder::dim() const { return dim_.load(); }

Embeddings HttpEmbedder::embed_raw(const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> rows(texts.size());
  for (std::size_t begin = 0; begin < texts.size(); begin += opts_.batch_size) {
    const std::size_t end = std::min(texts.size(), begin + opts_.batch_size);
    json body = {{"model", opts_.model},
                 {"input", std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                                    texts.begin() + static_cast<std::ptrdiff_t>(end))}};
    json res = post_json(opts_.base_url, opts_.api_key_env, opts_.timeout_s, body);
    try {
      std::size_t received = 0;
      for (const auto& item : res.at("data")) {
        const auto idx = item.at("index").get<std::size_t>();
        if (idx >= end - begin) throw TransportError("embedding index " + std::to_string(idx) + " out of range");
        rows[begin + idx] = item.at("embedding").get<std::vector<double>>();
        ++received;
      }
      if (received != end - begin) throw TransportError("embedding response is missing vectors");
    } catch (const json::exception& e) {
      throw TransportError(std::string("unexpected embedding response shape: ") + e.what());
    }
  }
  std::size_t d = dim_.load();
  if (d == 0 && !rows.empty()) {
    d = rows.front().size();
    dim_.store(d);
  }
  Embeddings m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d)
      throw TransportError("embedding " + std::to_string(i) + " has dim " + std::to_string(rows[i].size()) +
                           ", expected " + std::to_string(d));
    m.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(rows[i].data(), static_cast<Eigen::Index>(d));
  }
  return m;
}

}  // namespace grantopic
