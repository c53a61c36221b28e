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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace grantopic {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed corpus or artifact file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(std::string id)
      : Error("duplicate document id '" + id + "'"), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Validation failure that names the offending items (doc ids, placeholder names, keys).
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::vector<std::string> items)
      : Error(what + format(items)), items_(std::move(items)) {}
  const std::vector<std::string>& items() const noexcept { return items_; }

 private:
  static std::string format(const std::vector<std::string>& items) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : ": ") + items[i];
    return s;
  }
  std::vector<std::string> items_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// LLM / embedding transport.
class TransportError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  ProviderError(int status, const std::string& body)
      : Error("provider returned status " + std::to_string(status) + ": " + body), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class EmptyCompletionError : public Error {
 public:
  using Error::Error;
};

/// A model response that could not be interpreted (topic list, merge directives, verdict).
class ResponseFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace grantopic
