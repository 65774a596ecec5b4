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

#pragma once

// Helpers for decoding JSON documents with errors that name the offending
// field, e.g. "classes[2].subcategories[0].adjectives: expected array".

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dvs::json_util {

using nlohmann::json;

/// Parses `text`; syntax errors become ParseError("<what>:<line>:<col>: ...").
json parse(std::string_view text, std::string_view what);

std::string join_path(const std::string& parent, std::string_view key);
std::string index_path(const std::string& parent, std::size_t i);

const json& require(const json& obj, std::string_view key, const std::string& path);
const json& require_object(const json& obj, std::string_view key, const std::string& path);
const json& require_array(const json& obj, std::string_view key, const std::string& path);
std::string require_string(const json& obj, std::string_view key, const std::string& path);
std::int64_t require_int(const json& obj, std::string_view key, const std::string& path);
double require_number(const json& obj, std::string_view key, const std::string& path);
bool require_bool(const json& obj, std::string_view key, const std::string& path);
std::vector<std::string> require_string_array(const json& obj, std::string_view key,
                                              const std::string& path);

/// Throws ParseError if `obj` is not an object.
void expect_object(const json& obj, const std::string& path);

}  // namespace dvs::json_util
