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
#include "grantopic/parsers.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include <boost/regex.hpp>

#include "grantopic/errors.hpp"
#include "grantopic/model.hpp"

namespace grantopic {
namespace {

std::vector<std::string> lines_of(std::string_view s) {
  std::vector<std::string> out;
  std::string line;
  std::istringstream in{std::string(s)};
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string strip_quotes(std::string s) {
  if (s.size() >= 2) {
    const char a = s.front(), b = s.back();
    if ((a == '"' && b == '"') || (a == '\'' && b == '\'') || (a == '`' && b == '`')) s = trim(s.substr(1, s.size() - 2));
  }
  return s;
}

std::string strip_bullet(std::string s) {
  if (s.size() >= 2 && (s[0] == '-' || s[0] == '*') && s[1] == ' ') return trim(s.substr(2));
  return s;
}

std::vector<std::size_t> parse_indices(const std::string& list, const std::string& line) {
  std::vector<std::size_t> out;
  std::string item;
  std::istringstream in(list);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || p != item.data() + item.size())
      throw ResponseFormatError("malformed index '" + item + "' in line: " + line);
    out.push_back(v);
  }
  return out;
}

bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

}  // namespace

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_none_response(std::string_view response) {
  std::string s = strip_quotes(trim(response));
  if (!s.empty() && s.back() == '.') s.pop_back();
  return to_lower(strip_quotes(trim(s))) == "none";
}

std::vector<std::string> parse_topic_list(std::string_view response) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::string item;
  auto flush = [&] {
    std::string t = trim(item);
    item.clear();
    if (t.empty() || to_lower(t) == "none") return;
    if (seen.insert(to_lower(t)).second) out.push_back(std::move(t));
  };
  for (char c : response) {
    if (c == ',' || c == '\n') flush();
    else item += c;
  }
  flush();
  if (out.empty()) throw ResponseFormatError("no topic names in response: '" + std::string(response) + "'");
  return out;
}

MergeParse parse_merge_directives(std::string_view response, std::size_t n_topics) {
  if (n_topics < 1) throw PreconditionError("parse_merge_directives needs n_topics >= 1");
  if (is_none_response(response)) return NoChange{};
  static const boost::regex colon_form(R"(^(.+?)\s*:\s*(\d+(?:\s*,\s*\d+)*)\s*$)");
  static const boost::regex paren_form(R"(^(.+?)\s*\(\s*(\d+(?:\s*,\s*\d+)*)\s*\)\s*$)");

  std::vector<MergeDirective> out;
  std::set<std::size_t> used;
  for (const auto& line : lines_of(response)) {
    boost::smatch m;
    if (!boost::regex_match(line, m, colon_form) && !boost::regex_match(line, m, paren_form))
      throw ResponseFormatError("malformed directive line: " + line);
    MergeDirective d;
    d.name = strip_quotes(trim(m[1].str()));
    if (d.name.empty()) throw ResponseFormatError("directive without a name: " + line);
    for (auto idx : parse_indices(m[2].str(), line)) {
      if (idx >= n_topics)
        throw ResponseFormatError("index " + std::to_string(idx) + " out of range [0, " + std::to_string(n_topics) +
                                  ") in line: " + line);
      if (std::find(d.indices.begin(), d.indices.end(), idx) != d.indices.end()) continue;
      if (!used.insert(idx).second)
        throw ResponseFormatError("index " + std::to_string(idx) + " appears in more than one directive");
      d.indices.push_back(idx);
    }
    std::sort(d.indices.begin(), d.indices.end());
    out.push_back(std::move(d));
  }
  if (out.empty()) throw ResponseFormatError("empty merge response");
  return out;
}

int parse_judge_level(std::string_view response, const JudgeScale& scale) {
  const std::string text = to_lower(response);
  int best = 0;
  std::size_t best_len = 0;
  for (std::size_t r = 0; r < scale.size(); ++r) {
    const std::string name = to_lower(scale[r]);
    for (auto pos = text.find(name); pos != std::string::npos; pos = text.find(name, pos + 1)) {
      const bool left_ok = pos == 0 || !is_word_char(static_cast<unsigned char>(text[pos - 1]));
      const auto end = pos + name.size();
      const bool right_ok = end == text.size() || !is_word_char(static_cast<unsigned char>(text[end]));
      if (left_ok && right_ok && name.size() > best_len) {
        best = static_cast<int>(r) + 1;
        best_len = name.size();
      }
    }
  }
  if (best) return best;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c < '1' || c > '4') continue;
    const bool left_ok = i == 0 || !is_word_char(static_cast<unsigned char>(text[i - 1]));
    const bool right_ok = i + 1 == text.size() || !is_word_char(static_cast<unsigned char>(text[i + 1]));
    if (left_ok && right_ok) return c - '0';
  }
  throw ResponseFormatError("unparseable verdict: '" + std::string(response) + "'");
}

std::optional<std::size_t> match_name(std::string_view answer, std::span<const std::string> candidates) {
  const std::string a = strip_quotes(trim(answer));
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (trim(candidates[i]) == a) return i;
  const std::string la = to_lower(a);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (to_lower(trim(candidates[i])) == la) return i;
  return std::nullopt;
}

std::vector<std::optional<std::string>> parse_indexed_lines(std::string_view response, std::size_t n_docs) {
  static const boost::regex indexed(R"(^(?:doc(?:ument)?\s*#?\s*)?(\d+)\s*[:.)\]-]\s*(.*)$)",
                                    boost::regex::perl | boost::regex::icase);
  const auto lines = lines_of(response);
  if (lines.empty()) throw ResponseFormatError("empty per-document response");
  std::vector<std::optional<std::string>> out(n_docs);

  std::vector<boost::smatch> matches(lines.size());
  std::vector<std::string> stripped(lines.size());
  std::size_t n_indexed = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    stripped[i] = strip_bullet(lines[i]);
    if (boost::regex_match(stripped[i], matches[i], indexed)) ++n_indexed;
  }
  if (n_indexed == 0) {
    if (lines.size() != 1) throw ResponseFormatError("response has several unindexed lines");
    std::fill(out.begin(), out.end(), stripped.front());
    return out;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (matches[i].empty()) throw ResponseFormatError("unindexed line in per-document response: " + lines[i]);
    std::size_t idx = 0;
    const std::string digits = matches[i][1].str();
    std::from_chars(digits.data(), digits.data() + digits.size(), idx);
    if (idx >= n_docs)
      throw ResponseFormatError("document index " + std::to_string(idx) + " out of range in line: " + lines[i]);
    if (out[idx]) throw ResponseFormatError("document index " + std::to_string(idx) + " answered twice");
    out[idx] = trim(matches[i][2].str());
  }
  return out;
}

std::vector<std::optional<std::size_t>> parse_assignment_response(std::string_view response, std::size_t n_docs,
                                                                  std::span<const std::string> topics) {
  const auto raw = parse_indexed_lines(response, n_docs);
  std::vector<std::optional<std::size_t>> out(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) {
    if (!raw[i] || to_lower(strip_quotes(*raw[i])) == to_lower(kOther)) continue;
    out[i] = match_name(*raw[i], topics);
  }
  return out;
}

}  // namespace grantopic
