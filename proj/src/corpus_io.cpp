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
#include "grantopic/corpus_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "grantopic/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace grantopic {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename into '" + path.string() + "': " + ec.message());
  }
}

std::vector<Document> load_corpus(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus '" + path.string() + "'");
  std::vector<Document> docs;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!j.is_object()) throw ParseError("record is not an object", lineno);
    auto field = [&](const char* key, bool required) -> std::optional<std::string> {
      auto it = j.find(key);
      if (it == j.end() || it->is_null()) {
        if (required) throw ParseError(std::string("missing field '") + key + "'", lineno);
        return std::nullopt;
      }
      if (!it->is_string()) throw ParseError(std::string("field '") + key + "' must be a string", lineno);
      return it->get<std::string>();
    };
    Document d;
    d.id = *field("id", true);
    d.text = *field("text", true);
    d.gold_label = field("label", false);
    d.summary = field("summary", false);
    if (d.id.empty()) throw ParseError("empty 'id'", lineno);
    if (d.text.empty()) throw ParseError("empty 'text'", lineno);
    if (!seen.insert(d.id).second) throw DuplicateIdError(d.id);
    docs.push_back(std::move(d));
  }
  return docs;
}

void save_corpus(std::span<const Document> docs, const fs::path& path) {
  std::string out;
  for (const auto& d : docs) {
    json j = {{"id", d.id}, {"text", d.text}};
    if (d.gold_label) j["label"] = *d.gold_label;
    if (d.summary) j["summary"] = *d.summary;
    out += j.dump() + "\n";
  }
  write_file_atomic(path, out);
}

json to_json(const Topic& t) {
  json j = {{"id", t.id}, {"name", t.name}};
  if (t.parent_id) j["parent_id"] = *t.parent_id;
  if (!t.merged_from.empty()) j["merged_from"] = t.merged_from;
  if (t.source_cluster) j["source_cluster"] = *t.source_cluster;
  return j;
}

Topic topic_from_json(const json& j) {
  Topic t;
  t.id = j.at("id").get<std::string>();
  t.name = j.at("name").get<std::string>();
  if (j.contains("parent_id") && !j["parent_id"].is_null()) t.parent_id = j["parent_id"].get<std::string>();
  if (j.contains("merged_from")) t.merged_from = j["merged_from"].get<std::vector<std::string>>();
  if (j.contains("source_cluster") && !j["source_cluster"].is_null())
    t.source_cluster = j["source_cluster"].get<std::size_t>();
  return t;
}

json to_json(const TopicAssignment& a) {
  return {{"doc_id", a.doc_id}, {"topic_id", a.topic_id}, {"stage", to_string(a.stage)}};
}

TopicAssignment assignment_from_json(const json& j) {
  return {j.at("doc_id").get<std::string>(), j.at("topic_id").get<std::string>(),
          stage_from_string(j.at("stage").get<std::string>())};
}

json to_json(const Clustering& c) {
  return {{"k", c.k()}, {"assignment", c.assignment()}};
}

Clustering clustering_from_json(const json& j) {
  return Clustering(j.at("assignment").get<std::map<std::string, std::size_t>>(), j.at("k").get<std::size_t>());
}

void save_run(const TopicModelRun& run, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory '" + dir.string() + "': " + ec.message());

  json topics = json::array();
  for (const auto& t : run.topics) topics.push_back(to_json(t));
  write_file_atomic(dir / "topics.json", topics.dump(2) + "\n");

  std::string lines;
  for (const auto& a : run.assignments) lines += to_json(a).dump() + "\n";
  write_file_atomic(dir / "assignments.jsonl", lines);

  json meta = {{"run_id", run.run_id},
               {"config", run.config},
               {"clustering", to_json(run.clustering)},
               {"llm_call_count", run.llm_call_count},
               {"failures", run.failures},
               {"provenance", run.provenance}};
  write_file_atomic(dir / "run.json", meta.dump(2) + "\n");
}

TopicModelRun load_run(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("run directory '" + dir.string() + "' does not exist");
  TopicModelRun run;
  try {
    json meta = json::parse(read_file(dir / "run.json"));
    run.run_id = meta.at("run_id").get<std::string>();
    run.config = meta.at("config");
    run.clustering = clustering_from_json(meta.at("clustering"));
    run.llm_call_count = meta.at("llm_call_count").get<std::int64_t>();
    run.failures = meta.value("failures", std::vector<std::string>{});
    run.provenance = meta.value("provenance", json::object());

    json topics = json::parse(read_file(dir / "topics.json"));
    for (const auto& t : topics) run.topics.push_back(topic_from_json(t));
  } catch (const json::exception& e) {
    throw ParseError("malformed run artifact in '" + dir.string() + "': " + e.what());
  }

  std::ifstream in(dir / "assignments.jsonl");
  if (!in) throw IoError("cannot open '" + (dir / "assignments.jsonl").string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      run.assignments.push_back(assignment_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(std::string("assignments.jsonl: ") + e.what(), lineno);
    }
  }
  return run;
}

}  // namespace grantopic
