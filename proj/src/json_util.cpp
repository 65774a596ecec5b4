/*
 * Copyright 2026 The dvs Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dvs/json_util.hpp"

#include "dvs/error.hpp"

namespace dvs::json_util {

namespace {

[[noreturn]] void fail(const std::string& path, std::string_view msg) {
  throw ParseError((path.empty() ? std::string("<root>") : path) + ": " + std::string(msg));
}

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

json parse(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError(std::string(what) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                     ": malformed JSON (" + e.what() + ")");
  }
}

std::string join_path(const std::string& parent, std::string_view key) {
  return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

std::string index_path(const std::string& parent, std::size_t i) {
  return parent + "[" + std::to_string(i) + "]";
}

void expect_object(const json& obj, const std::string& path) {
  if (!obj.is_object()) {
    fail(path, "expected object");
  }
}

const json& require(const json& obj, std::string_view key, const std::string& path) {
  expect_object(obj, path);
  auto it = obj.find(key);
  if (it == obj.end()) {
    fail(join_path(path, key), "missing field");
  }
  return *it;
}

const json& require_object(const json& obj, std::string_view key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_object()) {
    fail(join_path(path, key), "expected object");
  }
  return v;
}

const json& require_array(const json& obj, std::string_view key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_array()) {
    fail(join_path(path, key), "expected array");
  }
  return v;
}

std::string require_string(const json& obj, std::string_view key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) {
    fail(join_path(path, key), "expected string");
  }
  return v.get<std::string>();
}

std::int64_t require_int(const json& obj, std::string_view key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer()) {
    fail(join_path(path, key), "expected integer");
  }
  return v.get<std::int64_t>();
}

double require_number(const json& obj, std::string_view key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) {
    fail(join_path(path, key), "expected number");
  }
  return v.get<double>();
}

bool require_bool(const json& obj, std::string_view key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_boolean()) {
    fail(join_path(path, key), "expected boolean");
  }
  return v.get<bool>();
}

std::vector<std::string> require_string_array(const json& obj, std::string_view key,
                                              const std::string& path) {
  const json& arr = require_array(obj, key, path);
  std::vector<std::string> out;
  out.reserve(arr.size());
  const std::string p = join_path(path, key);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) {
      fail(index_path(p, i), "expected string");
    }
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

}  // namespace dvs::json_util
