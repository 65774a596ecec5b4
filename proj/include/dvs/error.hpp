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

#include <stdexcept>
#include <string>

namespace dvs {

/// Base class for every error raised by the library. The CLI maps the
/// subclasses onto process exit codes (see ExitCode).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a documented invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure (missing file, unwritable directory, short write).
class IoError : public Error {
 public:
  using Error::Error;
};

/// A file or message could not be decoded. `what()` carries line/field
/// context when available.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A persisted document declares a schema/format version we do not read.
class VersionError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Binary container corruption: bad magic, inconsistent header, truncation.
class FormatError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Vector dimensionalities disagree.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An LLM response referenced a label that was not in the request.
class HallucinationError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Network failure after the retry budget, or a non-retryable HTTP status.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// A provider answered but violated the wire protocol (missing ids,
/// inconsistent dims).
class ProtocolError : public TransportError {
 public:
  using TransportError::TransportError;
};

/// Replay store has no transcript for the request.
class ReplayMissError : public Error {
 public:
  ReplayMissError(const std::string& hash)
      : Error("replay miss: no transcript for request " + hash), hash_(hash) {}
  const std::string& hash() const noexcept { return hash_; }

 private:
  std::string hash_;
};

enum class ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kIo = 2,
  kNetwork = 3,
};

/// Exit code for an exception escaping a CLI command.
inline ExitCode exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const TransportError*>(&e) || dynamic_cast<const ReplayMissError*>(&e)) {
    return ExitCode::kNetwork;
  }
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParseError*>(&e)) {
    return ExitCode::kIo;
  }
  return ExitCode::kValidation;
}

}  // namespace dvs
