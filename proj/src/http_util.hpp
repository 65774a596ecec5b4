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

// Internal: thin helpers over cpp-httplib shared by the chat and provider
// clients.

#include <chrono>
#include <memory>
#include <string>

#include "httplib.h"

namespace dvs::detail {

struct Endpoint {
  std::string origin;       // "http://host:port"
  std::string path_prefix;  // "" or "/v1" (no trailing slash)
};

/// Splits "http://host:port/prefix/" into origin and path prefix.
/// Throws ValidationError for URLs without a scheme.
Endpoint split_url(const std::string& base_url);

std::unique_ptr<httplib::Client> make_client(const Endpoint& ep, std::chrono::milliseconds timeout);

}  // namespace dvs::detail
